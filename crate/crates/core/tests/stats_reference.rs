//! Statistics against reference values produced by `data/stats_oracle.py`.

mod common;

use common::reference::cases;
use gapsat::stats::{cohens_d, paired_t_test, welch_t_test, wilcoxon_signed_rank};

fn close(got: f64, want: f64, tol: f64, what: &str, i: usize) {
    assert!((got - want).abs() <= tol, "vector {i}: {what} = {got}, reference {want}");
}

#[test]
fn paired_t_matches_reference() {
    for (i, c) in cases().iter().enumerate() {
        let r = paired_t_test(&c.a, &c.b).unwrap();
        close(r.t, c.t, 1e-6, "t", i);
        close(r.p, c.t_p, 1e-6, "p", i);
        assert_eq!(r.df, c.a.len() as f64 - 1.0);
    }
}

#[test]
fn welch_matches_reference() {
    for (i, c) in cases().iter().enumerate() {
        let r = welch_t_test(&c.a, &c.b).unwrap();
        close(r.t, c.welch_t, 1e-6, "welch t", i);
        close(r.p, c.welch_p, 1e-6, "welch p", i);
    }
}

#[test]
fn wilcoxon_matches_reference() {
    for (i, c) in cases().iter().enumerate() {
        let r = wilcoxon_signed_rank(&c.a, &c.b).unwrap();
        assert_eq!(r.w_plus, c.w_plus, "vector {i}");
        assert_eq!(r.exact, c.exact, "vector {i}");
        close(r.p, c.w_p, 1e-4, "wilcoxon p", i);
        if c.exact {
            close(r.p, c.w_p, 1e-12, "exact wilcoxon p", i);
        }
    }
}

#[test]
fn cohens_d_matches_reference() {
    for (i, c) in cases().iter().enumerate() {
        close(cohens_d(&c.a, &c.b).unwrap(), c.d, 1e-9, "d", i);
    }
}

#[test]
fn swapping_samples_negates_statistics() {
    for c in cases() {
        let (ab, ba) = (paired_t_test(&c.a, &c.b).unwrap(), paired_t_test(&c.b, &c.a).unwrap());
        assert!((ab.t + ba.t).abs() < 1e-12 && (ab.p - ba.p).abs() < 1e-12);
        let (ab, ba) = (wilcoxon_signed_rank(&c.a, &c.b).unwrap(), wilcoxon_signed_rank(&c.b, &c.a).unwrap());
        let n = ab.n as f64;
        assert!((ab.w_plus + ba.w_plus - n * (n + 1.0) / 2.0).abs() < 1e-9);
        assert!((ab.p - ba.p).abs() < 1e-12);
        assert!((cohens_d(&c.a, &c.b).unwrap() + cohens_d(&c.b, &c.a).unwrap()).abs() < 1e-12);
    }
}
