//! Statistics reference vectors produced by `data/stats_oracle.py`.

pub struct Case {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
    pub t_p: f64,
    pub welch_t: f64,
    pub welch_p: f64,
    pub w_plus: f64,
    pub w_p: f64,
    pub exact: bool,
    pub d: f64,
}

#[allow(clippy::too_many_arguments)]
fn case(a: Vec<f64>, b: Vec<f64>, t: f64, t_p: f64, welch: (f64, f64), w_plus: f64, w_p: f64, exact: bool, d: f64) -> Case {
    Case { a, b, t, t_p, welch_t: welch.0, welch_p: welch.1, w_plus, w_p, exact, d }
}

pub fn cases() -> Vec<Case> {
    let v9a: Vec<f64> = (1..=20).map(|i| i as f64 + 0.3 * ((7 * i) % 5) as f64).collect();
    let v9b: Vec<f64> = (1..=20).map(|i| i as f64 + 0.25 * ((3 * i) % 7) as f64 - 0.1).collect();
    let v10a: Vec<f64> = (0..25).map(|i| ((37 * i) % 23) as f64 + 0.1 * i as f64).collect();
    let v10b: Vec<f64> = (0..25).map(|i| ((29 * i) % 19) as f64 + 0.05 * i as f64 + 1.0).collect();
    vec![
        case(
            vec![1.1, 2.0, 3.2, 4.1, 5.3],
            vec![1.0, 2.1, 3.0, 4.0, 5.0],
            1.8090680674665807,
            0.14470399860633051,
            (0.11750033149011774, 0.9093701396370131),
            12.5,
            0.25,
            true,
            0.07431373466671569,
        ),
        case(
            vec![3.0, 7.0, 2.5, 9.1, 4.4, 6.0],
            vec![2.0, 7.5, 1.0, 8.0, 4.0, 3.5],
            2.420614591379636,
            0.060071845940766394,
            (0.642883383530781, 0.5349835322963032),
            19.0,
            0.09375,
            true,
            0.37116889453903384,
        ),
        case(
            vec![10.0, 12.0, 9.0, 15.0, 11.0, 14.0, 13.0],
            vec![11.5, 12.5, 10.0, 17.0, 11.25, 16.0, 15.5],
            -4.387842813611493,
            0.004628764511569015,
            (-1.0584443508748322, 0.31177127597261184),
            0.0,
            0.015625,
            true,
            -0.5657623034199951,
        ),
        case(
            vec![0.5, 0.7, 0.2, 0.9, 0.4, 0.6, 0.3, 0.8],
            vec![0.45, 0.75, 0.05, 0.6, 0.42, 0.35, 0.31, 0.52],
            2.3249900748805303,
            0.053003489231333134,
            (1.0435960404817273, 0.3147940391342413),
            29.0,
            0.1484375,
            true,
            0.5217980202408636,
        ),
        case(
            vec![120.0, 340.0, 95.0, 410.0, 230.0, 180.0, 75.0, 500.0, 260.0],
            vec![150.0, 300.0, 140.0, 380.0, 290.0, 170.0, 60.0, 610.0, 275.0],
            -1.139116820772695,
            0.2876123182365773,
            (-0.25004484964640794, 0.8057703910697586),
            14.0,
            0.35546875,
            true,
            -0.1178722725238305,
        ),
        case(
            (1..=10).map(|i| (i * i) as f64).collect(),
            vec![2.0, 3.0, 11.0, 13.0, 27.0, 30.0, 52.0, 60.0, 85.0, 90.0],
            0.8447818580350775,
            0.4201218351228809,
            (0.08018115669000432, 0.9369795345035254),
            33.5,
            0.576171875,
            true,
            0.035858103374682336,
        ),
        case(
            vec![5.5, 6.1, 4.9, 7.3, 6.6, 5.0, 5.9, 6.8, 7.1, 4.4, 6.0, 5.2],
            vec![5.0, 6.3, 4.1, 6.9, 6.0, 4.7, 6.2, 6.1, 6.4, 4.6, 5.5, 4.3],
            3.291391655225398,
            0.00718695098652694,
            (1.0304756174951337, 0.3139839453111678),
            71.5,
            0.0078125,
            true,
            0.42068990920708194,
        ),
        case(
            vec![2.2, 3.9, 1.4, 5.6, 2.8, 4.1, 3.3, 1.9, 4.8, 2.5, 3.6, 5.1, 2.0, 4.4, 3.0],
            vec![2.0, 3.1, 1.9, 4.2, 2.5, 4.6, 2.1, 1.2, 3.9, 2.6, 3.0, 4.0, 1.1, 3.7, 2.2],
            3.798603242059491,
            0.0019561967121118017,
            (1.3129412468238524, 0.20009258707585914),
            110.0,
            0.00244140625,
            true,
            0.4794183583762547,
        ),
        case(
            v9a,
            v9b,
            -0.5730576425878937,
            0.5733260275013143,
            (-0.04692960528378858, 0.9628151177845037),
            85.0,
            0.46662150865694885,
            false,
            -0.014840444238944456,
        ),
        case(
            v10a,
            v10b,
            1.1847843657281565,
            0.24770291250044293,
            (1.1068970945612155, 0.27407775672826906),
            204.0,
            0.2699475363986631,
            false,
            0.3130777766559691,
        ),
        case(
            (1..=22).map(f64::from).collect(),
            vec![2., 1., 3., 6., 3., 6., 8., 6., 9., 12., 9., 12., 14., 12., 15., 18., 15., 18., 20., 18., 21., 24.],
            0.14571742950615305,
            0.885534110608097,
            (0.022882864399083287, 0.9818521699173097),
            66.0,
            0.7564697265625,
            true,
            0.006899443212758242,
        ),
        case(
            vec![0.12, 0.55, 0.31, 0.87, 0.44, 0.09, 0.73, 0.66, 0.28, 0.95, 0.51, 0.37],
            vec![0.20, 0.41, 0.35, 0.70, 0.52, 0.15, 0.60, 0.71, 0.22, 0.80, 0.49, 0.30],
            1.2897479375340892,
            0.22359488209282088,
            (0.35332437463350574, 0.7273892347597224),
            54.0,
            0.2578125,
            true,
            0.14424407192334218,
        ),
    ]
}
