//! Named reference series kept in an embedded JSON table, and exact
//! order-by-order comparison against computed series.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SaptError};
use crate::matrix::{scalar_latex, PowerSeries};
use crate::recursion::{verify_defects, ScalingConfig};

const STORE_JSON: &str = include_str!("../fixtures/store.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fixture {
    pub description: String,
    pub series: PowerSeries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureStore {
    pub version: u32,
    pub fixtures: BTreeMap<String, Fixture>,
}

impl FixtureStore {
    pub fn parse(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }
}

pub fn store() -> &'static FixtureStore {
    static STORE: OnceLock<FixtureStore> = OnceLock::new();
    STORE.get_or_init(|| FixtureStore::parse(STORE_JSON).expect("embedded fixture store is valid"))
}

pub fn fixture_names() -> Vec<&'static str> {
    store().fixtures.keys().map(String::as_str).collect()
}

pub fn fixture(name: &str) -> Result<&'static Fixture> {
    store().fixtures.get(name).ok_or_else(|| SaptError::UnknownFixture(name.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryDiff {
    pub order: usize,
    pub row: usize,
    pub col: usize,
    pub expected: String,
    pub computed: String,
    /// computed minus expected, canonical
    pub difference: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffReport {
    pub fixture: String,
    pub orders_checked: usize,
    pub passed: bool,
    pub mismatches: Vec<EntryDiff>,
}

impl DiffReport {
    pub fn mismatched_orders(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.mismatches.iter().map(|d| d.order).collect();
        v.dedup();
        v
    }
}

/// Compares every order the fixture carries. The computed series must reach at
/// least the fixture's truncation.
pub fn compare_fixture(name: &str, computed: &PowerSeries) -> Result<DiffReport> {
    let fx = fixture(name)?;
    let want = &fx.series;
    if computed.scaling != want.scaling {
        return Err(SaptError::ScalingMismatch);
    }
    if computed.truncation < want.truncation {
        return Err(SaptError::TruncationMismatch(computed.truncation, want.truncation));
    }
    let mut mismatches = Vec::new();
    for n in 0..=want.truncation {
        let (a, b) = (want.get(n), computed.get(n));
        for r in 0..4 {
            for c in 0..4 {
                let diff = (b.get(r, c) - a.get(r, c)).normal_form();
                if !diff.is_zero() {
                    mismatches.push(EntryDiff {
                        order: n,
                        row: r,
                        col: c,
                        expected: scalar_latex(&a.get(r, c).normal_form()),
                        computed: scalar_latex(&b.get(r, c).normal_form()),
                        difference: scalar_latex(&diff),
                    });
                }
            }
        }
    }
    Ok(DiffReport { fixture: name.to_string(), orders_checked: want.truncation + 1, passed: mismatches.is_empty(), mismatches })
}

/// The two stored closed forms for the third-order unitary.
pub const U3_VARIANTS: [&str; 2] = ["nr_u3_summary", "nr_u3_stepwise"];

#[derive(Clone, Debug, Serialize)]
pub struct U3Verdict {
    /// variants equal to the computed u₃
    pub matches: Vec<String>,
    /// variant with the fewest mismatching entries
    pub closest: String,
    /// whether each stored variant, substituted for u₃, passes all four defects
    pub variant_defects_pass: BTreeMap<String, bool>,
    pub reports: Vec<DiffReport>,
}

/// Which of the third-order unitary variants the computed series reproduces,
/// and whether either variant is consistent with the defect equations at all.
pub fn adjudicate_u3(cfg: &ScalingConfig, pi: &PowerSeries, computed: &PowerSeries) -> Result<U3Verdict> {
    let u = computed.with_truncation(3);
    let mut reports = Vec::new();
    let mut variant_defects_pass = BTreeMap::new();
    for name in U3_VARIANTS {
        reports.push(compare_fixture(name, &u)?);
        let reps = verify_defects(cfg, pi, &fixture(name)?.series, 3)?;
        variant_defects_pass.insert(name.to_string(), reps.iter().all(|r| r.passed));
    }
    let matches = reports.iter().filter(|r| r.passed).map(|r| r.fixture.clone()).collect();
    let closest = reports.iter().min_by_key(|r| r.mismatches.len()).map(|r| r.fixture.clone()).unwrap_or_default();
    Ok(U3Verdict { matches, closest, variant_defects_pass, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Scaling;

    #[test]
    fn store_loads_and_names_are_known() {
        let names = fixture_names();
        for n in ["nr_pi3", "nr_u3_summary", "nr_u3_stepwise", "nr_h3", "nr_heff4", "sr_pi2", "sr_u2", "sr_heff3"] {
            assert!(names.contains(&n), "{n}");
        }
    }

    #[test]
    fn unknown_fixture() {
        let s = PowerSeries::new(Scaling::Nr, 0);
        assert!(matches!(compare_fixture("nope", &s), Err(SaptError::UnknownFixture(_))));
    }

    #[test]
    fn fixture_matches_itself_and_reports_diffs() {
        let fx = &fixture("nr_h3").unwrap().series;
        assert!(compare_fixture("nr_h3", fx).unwrap().passed);
        let mut broken = fx.clone();
        broken.set(1, crate::matrix::MatrixSymbol::beta());
        let rep = compare_fixture("nr_h3", &broken).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.mismatched_orders(), vec![1]);
    }

    #[test]
    fn short_series_is_rejected() {
        let s = PowerSeries::new(Scaling::Nr, 1);
        assert!(matches!(compare_fixture("nr_h3", &s), Err(SaptError::TruncationMismatch(1, 3))));
    }
}
