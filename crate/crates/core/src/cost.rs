//! Analytic communication-cost functions and the strategy decision rule.
//!
//! With `N_p` peers, average overlay degree `d = N_c / N_p`, and
//! replication rate `k`, the symbol costs of the two strategies are
//!
//! ```text
//! cost_s1 = N_p * (2 d Q_lbl + k D_s1)
//! cost_s2 = N_p * (2 d Q_bc  + k D_s2)
//! ```
//!
//! The broadcast term approximates one flood as `2 N_c` messages. Comparing
//! the two costs reduces to comparing `k / d` with the query-dependent
//! discriminant `2 (Q_bc - Q_lbl) / (D_s1 - D_s2)`: the bottom-up strategy
//! wins exactly when `k / d` exceeds it. All arithmetic is exact rational
//! so boundary cases are decided without rounding.

use std::fmt;

use num::{BigRational, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::strategies::{CostRecord, Strategy};

pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

pub fn rational_from_u64(value: u64) -> BigRational {
    BigRational::from_integer(value.into())
}

/// Network and distribution parameters of the cost functions.
#[derive(Debug, Clone)]
pub struct NetworkParams {
    pub n_p: u64,
    /// Average overlay degree, `N_c / N_p`.
    pub d: BigRational,
    /// Replication rate.
    pub k: BigRational,
}

impl NetworkParams {
    pub fn new(n_p: u64, d: BigRational, k: BigRational) -> NetworkParams {
        NetworkParams { n_p, d, k }
    }

    /// The decision regions are only defined for `0 < k < 1 < d`.
    pub fn validate_for_classify(&self) -> Result<()> {
        let one = BigRational::from_integer(1.into());
        if !(self.k > BigRational::zero() && self.k < one && self.d > one) {
            return Err(Error::Config(format!(
                "strategy classification requires 0 < k < 1 < d, got k = {} and d = {}",
                self.k, self.d
            )));
        }
        Ok(())
    }
}

/// The four symbol counts the cost functions consume, exact or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostInputs {
    pub q_lbl: u64,
    pub d_s1: u64,
    pub q_bc: u64,
    pub d_s2: u64,
}

impl CostInputs {
    /// Merge a matched pair of strategy runs into one input set. Returns
    /// `None` unless the s1 record carries `d_s1` and the s2 record carries
    /// `q_bc` and `d_s2`.
    pub fn from_records(s1: &CostRecord, s2: &CostRecord) -> Option<CostInputs> {
        Some(CostInputs {
            q_lbl: s1.q_lbl,
            d_s1: s1.d_s1?,
            q_bc: s2.q_bc?,
            d_s2: s2.d_s2?,
        })
    }
}

/// Total symbols moved by the top-down strategy.
pub fn cost_s1(p: &NetworkParams, c: &CostInputs) -> BigRational {
    cost_formula(p, c.q_lbl, c.d_s1)
}

/// Total symbols moved by the bottom-up strategy.
pub fn cost_s2(p: &NetworkParams, c: &CostInputs) -> BigRational {
    cost_formula(p, c.q_bc, c.d_s2)
}

fn cost_formula(p: &NetworkParams, broadcast: u64, data: u64) -> BigRational {
    let two = rational(2, 1);
    let n_p = rational_from_u64(p.n_p);
    n_p * (two * &p.d * rational_from_u64(broadcast) + &p.k * rational_from_u64(data))
}

/// The query-dependent decision value, or the degenerate region it falls
/// in.
#[derive(Debug, Clone, PartialEq)]
pub enum Discriminant {
    /// `2 (Q_bc - Q_lbl) / (D_s1 - D_s2)`; the bottom-up strategy is
    /// cheaper exactly when `k/d` exceeds this value (for positive values).
    Value(BigRational),
    /// The strategies retrieve the same amount of data; only the broadcast
    /// terms differ.
    EqualData,
    /// The bottom-up strategy broadcasts no more and retrieves no more; it
    /// is optimal for every network.
    S2Dominant,
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discriminant::Value(v) => {
                write!(f, "{} (~{:.6})", v, v.to_f64().unwrap_or(f64::NAN))
            }
            Discriminant::EqualData => write!(f, "equal-data"),
            Discriminant::S2Dominant => write!(f, "s2-dominant"),
        }
    }
}

pub fn discriminant(c: &CostInputs) -> Discriminant {
    if c.q_bc <= c.q_lbl && c.d_s1 >= c.d_s2 {
        if c.q_bc == c.q_lbl && c.d_s1 == c.d_s2 {
            return Discriminant::EqualData;
        }
        return Discriminant::S2Dominant;
    }
    if c.d_s1 == c.d_s2 {
        return Discriminant::EqualData;
    }
    let numer = rational_from_u64(c.q_bc) - rational_from_u64(c.q_lbl);
    let denom = rational_from_u64(c.d_s1) - rational_from_u64(c.d_s2);
    Discriminant::Value(rational(2, 1) * numer / denom)
}

/// Pick the cheaper strategy for these parameters; ties go to the top-down
/// strategy, which needs a single broadcast.
pub fn classify(p: &NetworkParams, c: &CostInputs) -> Result<Strategy> {
    p.validate_for_classify()?;
    Ok(if cost_s2(p, c) < cost_s1(p, c) {
        Strategy::S2
    } else {
        Strategy::S1
    })
}

/// One branch of a quantile-based estimate: cost inputs that occur with the
/// given probability.
#[derive(Debug, Clone)]
pub struct BranchReport {
    pub label: String,
    pub probability: f64,
    pub inputs: CostInputs,
    pub cost_s1: BigRational,
    pub cost_s2: BigRational,
    pub winner: Strategy,
}

/// Outcome of [`recommend`]: per-branch winners plus the overall pick.
#[derive(Debug, Clone)]
pub struct Recommendation {
    pub branches: Vec<BranchReport>,
    pub winner: Strategy,
    /// Probability mass of the branches the winner is cheaper on.
    pub confidence: f64,
}

/// Compare the strategies across a low/high estimate split: the low inputs
/// hold with probability `pi_low`, the high inputs with `1 - pi_low`.
/// The recommendation is the strategy winning the larger probability mass;
/// an exact tie goes to the top-down strategy.
pub fn recommend(
    p: &NetworkParams,
    low: &CostInputs,
    high: &CostInputs,
    pi_low: f64,
) -> Result<Recommendation> {
    if !(0.0..=1.0).contains(&pi_low) {
        return Err(Error::Config(format!(
            "branch probability {pi_low} outside [0, 1]"
        )));
    }
    let mut branches = Vec::new();
    for (label, inputs, probability) in
        [("low", low, pi_low), ("high", high, 1.0 - pi_low)]
    {
        branches.push(BranchReport {
            label: label.to_string(),
            probability,
            inputs: *inputs,
            cost_s1: cost_s1(p, inputs),
            cost_s2: cost_s2(p, inputs),
            winner: classify(p, inputs)?,
        });
    }
    let s2_mass: f64 = branches
        .iter()
        .filter(|b| b.winner == Strategy::S2)
        .map(|b| b.probability)
        .sum();
    let (winner, confidence) = if s2_mass > 0.5 {
        (Strategy::S2, s2_mass)
    } else {
        (Strategy::S1, 1.0 - s2_mass)
    };
    Ok(Recommendation {
        branches,
        winner,
        confidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_params() -> NetworkParams {
        NetworkParams::new(150, rational(3, 1), rational(1, 5))
    }

    fn scenario_low() -> CostInputs {
        CostInputs {
            q_lbl: 18,
            d_s1: 1800,
            q_bc: 70,
            d_s2: 15,
        }
    }

    #[test]
    fn scenario_costs() {
        let p = scenario_params();
        let c = scenario_low();
        assert_eq!(cost_s1(&p, &c), rational(70200, 1));
        assert_eq!(cost_s2(&p, &c), rational(63450, 1));
    }

    #[test]
    fn zero_inputs_cost_nothing() {
        let p = scenario_params();
        let c = CostInputs {
            q_lbl: 0,
            d_s1: 0,
            q_bc: 0,
            d_s2: 0,
        };
        assert!(cost_s1(&p, &c).is_zero());
    }

    #[test]
    fn cost_is_linear_in_network_size() {
        let c = scenario_low();
        let p1 = scenario_params();
        let p2 = NetworkParams::new(300, rational(3, 1), rational(1, 5));
        assert_eq!(cost_s1(&p2, &c), rational(2, 1) * cost_s1(&p1, &c));
    }

    #[test]
    fn equal_inputs_make_equal_costs() {
        let p = scenario_params();
        let c = CostInputs {
            q_lbl: 7,
            d_s1: 100,
            q_bc: 7,
            d_s2: 100,
        };
        assert_eq!(cost_s1(&p, &c), cost_s2(&p, &c));
        assert_eq!(discriminant(&c), Discriminant::EqualData);
        assert_eq!(classify(&p, &c).unwrap(), Strategy::S1);
    }

    #[test]
    fn scenario_discriminant_value() {
        match discriminant(&scenario_low()) {
            Discriminant::Value(v) => {
                assert_eq!(v, rational(104, 1785));
                let f = v.to_f64().unwrap();
                assert!((f - 0.0583).abs() < 0.0005);
            }
            other => panic!("unexpected discriminant {other:?}"),
        }
    }

    #[test]
    fn zero_numerator_is_s2_dominant() {
        let c = CostInputs {
            q_lbl: 5,
            d_s1: 100,
            q_bc: 5,
            d_s2: 40,
        };
        assert_eq!(discriminant(&c), Discriminant::S2Dominant);
        assert_eq!(
            classify(&scenario_params(), &c).unwrap(),
            Strategy::S2
        );
    }

    #[test]
    fn s2_dominating_both_terms() {
        let c = CostInputs {
            q_lbl: 9,
            d_s1: 100,
            q_bc: 3,
            d_s2: 40,
        };
        assert_eq!(discriminant(&c), Discriminant::S2Dominant);
        assert_eq!(classify(&scenario_params(), &c).unwrap(), Strategy::S2);
    }

    #[test]
    fn equal_data_with_more_broadcast_prefers_s1() {
        let c = CostInputs {
            q_lbl: 3,
            d_s1: 50,
            q_bc: 30,
            d_s2: 50,
        };
        assert_eq!(discriminant(&c), Discriminant::EqualData);
        assert_eq!(classify(&scenario_params(), &c).unwrap(), Strategy::S1);
    }

    #[test]
    fn discriminant_above_one_means_s1(){
        // k/d < 1 always holds in the valid region, so discr > 1 forces s1.
        let c = CostInputs {
            q_lbl: 2,
            q_bc: 1000,
            d_s1: 150,
            d_s2: 100,
        };
        match discriminant(&c) {
            Discriminant::Value(v) => assert!(v > rational(1, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(classify(&scenario_params(), &c).unwrap(), Strategy::S1);
    }

    #[test]
    fn scenario_region_check() {
        // k/d = 1/15 > 104/1785, so the bottom-up strategy is cheaper.
        let p = scenario_params();
        let c = scenario_low();
        let k_over_d = &p.k / &p.d;
        assert_eq!(k_over_d, rational(1, 15));
        match discriminant(&c) {
            Discriminant::Value(v) => assert!(k_over_d > v),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(classify(&p, &c).unwrap(), Strategy::S2);
    }

    #[test]
    fn discriminant_is_scale_invariant() {
        let c = scenario_low();
        let scaled = CostInputs {
            q_lbl: c.q_lbl * 17,
            d_s1: c.d_s1 * 17,
            q_bc: c.q_bc * 17,
            d_s2: c.d_s2 * 17,
        };
        assert_eq!(discriminant(&c), discriminant(&scaled));
    }

    #[test]
    fn classification_requires_valid_region() {
        let bad = NetworkParams::new(10, rational(1, 2), rational(1, 5));
        assert!(classify(&bad, &scenario_low()).is_err());
        let bad_k = NetworkParams::new(10, rational(3, 1), rational(3, 2));
        assert!(classify(&bad_k, &scenario_low()).is_err());
    }

    #[test]
    fn scenario_recommendation() {
        let p = scenario_params();
        let high = CostInputs {
            q_lbl: 18,
            d_s1: 1800,
            q_bc: 8000,
            d_s2: 1800,
        };
        let rec = recommend(&p, &scenario_low(), &high, 0.9).unwrap();
        assert_eq!(rec.branches[0].winner, Strategy::S2);
        assert_eq!(rec.branches[1].winner, Strategy::S1);
        assert_eq!(rec.winner, Strategy::S2);
        assert!((rec.confidence - 0.9).abs() < 1e-12);
    }

    #[test]
    fn degenerate_probability_reduces_to_classify() {
        let p = scenario_params();
        let high = CostInputs {
            q_lbl: 18,
            d_s1: 1800,
            q_bc: 8000,
            d_s2: 1800,
        };
        let rec = recommend(&p, &scenario_low(), &high, 1.0).unwrap();
        assert_eq!(rec.winner, classify(&p, &scenario_low()).unwrap());
        assert_eq!(rec.confidence, 1.0);
    }

    #[test]
    fn identical_branches_classify_identically() {
        let p = scenario_params();
        let rec = recommend(&p, &scenario_low(), &scenario_low(), 0.3).unwrap();
        assert_eq!(rec.winner, Strategy::S2);
        assert_eq!(rec.confidence, 1.0);
    }

    #[test]
    fn out_of_range_probability_rejected() {
        let p = scenario_params();
        assert!(recommend(&p, &scenario_low(), &scenario_low(), 1.5).is_err());
    }

    #[test]
    fn classification_matches_discriminant_rule() {
        // Random sampling over the region where s2 broadcasts more but
        // retrieves less (the only one a wildcard-free query pair can
        // produce): there the bottom-up strategy wins exactly when k/d
        // exceeds the discriminant, with ties going to s1.
        let mut state = 0x2545F4914F6CDD1D_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut checked = 0;
        while checked < 500 {
            let q_lbl = next() % 50;
            let d_s2 = next() % 5000;
            let c = CostInputs {
                q_lbl,
                q_bc: q_lbl + 1 + next() % 2000,
                d_s1: d_s2 + 1 + next() % 5000,
                d_s2,
            };
            let Discriminant::Value(v) = discriminant(&c) else {
                continue;
            };
            assert!(v > BigRational::zero());
            let n_p = 2 + next() % 200;
            let k = rational((1 + next() % 99) as i64, 100);
            let d = rational((101 + next() % 900) as i64, 100);
            let p = NetworkParams::new(n_p, d.clone(), k.clone());
            let expected = if k / d > v { Strategy::S2 } else { Strategy::S1 };
            assert_eq!(classify(&p, &c).unwrap(), expected, "{c:?}");
            checked += 1;
        }
    }
}
