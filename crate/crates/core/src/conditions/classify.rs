use serde::{Deserialize, Serialize};

use super::{
    check_comparability, check_condition, Case, ComparabilityReport, ComparabilitySampling, ConditionError,
    ConditionReport, Family, Sampling, Verdict, WeightPair,
};
use crate::weights::{Exponents, Weight};

/// Samplings used by [`classify_sufficiency`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub condition: Sampling,
    pub comparability: ComparabilitySampling,
}

/// Evidence for one of the two sufficiency cases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseEvidence {
    pub case: Case,
    pub delta: f64,
    /// `p ≠ 2` in case a, `q ≠ 2` in case b.
    pub side_condition: bool,
    pub comparability: ComparabilityReport,
    pub applicable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub applicable: bool,
    /// The case that applies, or the first one tried when none does.
    pub which_case: Case,
    pub condition: ConditionReport,
    pub cases: Vec<CaseEvidence>,
}

/// Whether the sufficient condition applies to `pair` at `exps`, `p ≤ q`:
/// the pair is bounded on cubes and, in case a (`p' ≥ q`), `(u, dx) ∈ C(q/p')`
/// with `p ≠ 2`; in case b (`p' ≤ q`), `(dx, v) ∈ C(q'/p)` with `q ≠ 2`.
/// When `p' = q` both cases are tried.
pub fn classify_sufficiency(
    pair: &WeightPair,
    exps: &Exponents,
    config: &ClassifyConfig,
) -> Result<Classification, ConditionError> {
    if exps.p > exps.q {
        return Err(ConditionError::CaseMismatch { case: "premise".into(), requirement: "p <= q".into() });
    }
    let condition = check_condition(pair, exps, Family::Cubes, &config.condition)?;
    let bounded = matches!(condition.verdict, Verdict::Bounded { .. });
    let tol = 1e-12 * exps.q;
    let mut order = Vec::new();
    if exps.p_conj >= exps.q - tol {
        order.push(Case::A);
    }
    if exps.p_conj <= exps.q + tol {
        order.push(Case::B);
    }
    let lebesgue = Weight::lebesgue();
    let mut cases = Vec::new();
    for case in order {
        let (mu1, mu2, delta, side) = match case {
            Case::A => (&pair.u, &lebesgue, exps.q / exps.p_conj, (exps.p - 2.0).abs() > 1e-12),
            Case::B => (&lebesgue, &pair.v, exps.q_conj / exps.p, (exps.q - 2.0).abs() > 1e-12),
        };
        let comparability = check_comparability(mu1, mu2, delta, &config.comparability)?;
        let applicable = bounded && side && comparability.bounded();
        cases.push(CaseEvidence { case, delta, side_condition: side, comparability, applicable });
        if applicable {
            break;
        }
    }
    let hit = cases.iter().find(|c| c.applicable);
    Ok(Classification {
        applicable: hit.is_some(),
        which_case: hit.unwrap_or(&cases[0]).case,
        condition,
        cases,
    })
}
