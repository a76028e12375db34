// Hand transcription of the reference series. The embedded store must agree
// with it exactly; `regenerate_store` rewrites the JSON from this file.

use std::collections::BTreeMap;

use sapt::fixtures::{store, Fixture, FixtureStore};
use sapt::matrix::{MatrixSymbol as M, PowerSeries, Scaling};
use sapt::scalar::{rat, ScalarExpr as S};

/// c · i^i_pow · ε^eps · m^m_pow
fn k(n: i64, d: i64, i_pow: u32, eps: u32, m_pow: i32) -> S {
    let mut s = S::m_pow(m_pow).scale(&rat(n, d));
    for _ in 0..eps {
        s = &s * &S::eps();
    }
    for _ in 0..i_pow {
        s = &s * &S::i();
    }
    s
}

fn series(scaling: Scaling, terms: Vec<M>) -> PowerSeries {
    let mut p = PowerSeries::new(scaling, terms.len() - 1);
    for (n, t) in terms.into_iter().enumerate() {
        p.set(n, t);
    }
    p
}

fn sum(ms: &[M]) -> M {
    ms.iter().fold(M::zero(), |a, b| &a + b)
}

fn transcribe() -> FixtureStore {
    let beta = M::beta();
    let xa = M::xi_alpha();
    let xi2 = S::xi_sq();
    let pref = M::pi_ref();
    let bs = M::b_spin();
    let gva = M::grad_v_alpha();
    let v = M::scalar(S::v());
    let mut f = BTreeMap::new();
    let mut put = |name: &str, description: &str, series: PowerSeries| {
        f.insert(name.to_string(), Fixture { description: description.to_string(), series });
    };

    put(
        "nr_pi3",
        "non-relativistic almost-projection through order 3, closed form",
        series(
            Scaling::Nr,
            vec![
                pref.clone(),
                xa.scale(&k(1, 2, 0, 0, -1)),
                beta.scale(&(&xi2 * &k(-1, 4, 0, 0, -2))),
                sum(&[
                    (&bs * &beta).scale(&k(1, 4, 0, 1, -2)),
                    xa.scale(&(&xi2 * &k(-1, 4, 0, 0, -3))),
                    (&gva * &beta).scale(&k(1, 2, 1, 1, -2)),
                ]),
            ],
        ),
    );

    let u1 = (&xa * &beta).scale(&k(-1, 2, 0, 0, -1));
    let u2 = M::scalar(&xi2 * &k(-1, 8, 0, 0, -2));
    put(
        "nr_u3_summary",
        "non-relativistic almost-unitary through order 3, summary form",
        series(
            Scaling::Nr,
            vec![
                M::identity(),
                u1.clone(),
                u2.clone(),
                sum(&[bs.scale(&k(1, 4, 0, 1, -2)), (&xa * &beta).scale(&(&xi2 * &k(-3, 16, 0, 0, -3))), gva.scale(&k(-1, 2, 1, 1, -2))]),
            ],
        ),
    );
    put(
        "nr_u3_stepwise",
        "non-relativistic almost-unitary through order 3, step-by-step form",
        series(
            Scaling::Nr,
            vec![
                M::identity(),
                u1,
                u2,
                sum(&[bs.scale(&k(1, 8, 0, 1, -2)), (&xa * &beta).scale(&(&xi2 * &k(3, 16, 0, 0, -3))), gva.scale(&k(1, 4, 1, 1, -2))]),
            ],
        ),
    );

    put(
        "nr_h3",
        "non-relativistic diagonalized hamiltonian through order 3",
        series(
            Scaling::Nr,
            vec![beta.scale(&S::m()), M::zero(), &beta.scale(&(&xi2 * &k(1, 2, 0, 0, -1))) + &v, (&bs * &beta).scale(&k(-1, 2, 0, 1, -1))],
        ),
    );

    let bsig = M::b_sigma_el();
    put(
        "nr_heff4",
        "non-relativistic effective hamiltonian through order 4",
        series(
            Scaling::Nr,
            vec![
                pref.scale(&S::m()),
                M::zero(),
                pref.scale(&(&(&xi2 * &k(1, 2, 0, 0, -1)) + &S::v())),
                bsig.scale(&k(-1, 2, 0, 1, -1)),
                sum(&[
                    pref.scale(&(&xi2.pow(2) * &k(-1, 8, 0, 0, -3))),
                    M::grad_v_cross_xi_sigma_el().scale(&k(1, 4, 0, 1, -2)),
                    pref.scale(&(&M::laplace_v() * &k(1, 8, 0, 2, -2))),
                ]),
            ],
        ),
    );

    put("sr_pi2", "semi-relativistic almost-projection through order 2", series(Scaling::Sr, vec![M::pi0_sr(), M::zero(), M::zero()]));
    put("sr_u2", "semi-relativistic almost-unitary through order 2", series(Scaling::Sr, vec![M::u0_sr(), M::zero(), M::zero()]));

    // −ε/(2E(E+m)) ((E+m)B − ∇V∧ξ)·σ ⊕ 0
    let e = S::energy();
    let pre = (&S::energy_pow(-1) * &S::e_plus_m_pow(-1)).scale(&rat(-1, 2));
    let pre = &pre * &S::eps();
    let inner = &bsig.scale(&S::e_plus_m_pow(1)) - &M::grad_v_cross_xi_sigma_el();
    put(
        "sr_heff3",
        "semi-relativistic effective hamiltonian through order 3",
        series(Scaling::Sr, vec![pref.scale(&e), M::zero(), pref.scale(&S::v()), inner.scale(&pre)]),
    );

    FixtureStore { version: 1, fixtures: f }
}

#[test]
fn embedded_store_matches_transcription() {
    let want = transcribe();
    let have = store();
    assert_eq!(have.version, want.version);
    assert_eq!(have.fixtures.keys().collect::<Vec<_>>(), want.fixtures.keys().collect::<Vec<_>>());
    for (name, fx) in &want.fixtures {
        assert!(have.fixtures[name].series == fx.series, "{name}");
    }
}

#[test]
#[ignore = "rewrites fixtures/store.json"]
fn regenerate_store() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/store.json");
    let s = transcribe();
    let normal = FixtureStore {
        version: s.version,
        fixtures: s
            .fixtures
            .into_iter()
            .map(|(n, f)| (n, Fixture { description: f.description, series: f.series.normal_form() }))
            .collect(),
    };
    std::fs::write(path, normal.to_json().unwrap()).unwrap();
}
