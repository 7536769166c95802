//! Misclassification costs.
//!
//! The uniform cost matrix prices each (decision, truth) pair once: missed
//! spoofing is the most expensive outcome, missed jamming nearly so, false
//! attack alarms are moderate, and confusing the two attack types is cheap
//! because the receiver suppresses its solution either way. The
//! parameter-dependent variant refines three of those entries by how much
//! harm the particular interference vector actually does.

use crate::correlator::{estimate_code_phase, InterferenceParams};
use crate::error::{Error, Result};
use crate::priors::Hypothesis;

/// A 4x4 cost matrix; entry `(i, j)` is the cost of deciding `H_i` when
/// `H_j` is true.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostMatrix {
    c: [[f64; 4]; 4],
}

impl CostMatrix {
    pub fn new(c: [[f64; 4]; 4]) -> Result<Self> {
        for (i, row) in c.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal cost C[{i}][{i}] must be zero, got {}",
                    row[i]
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "cost C[{i}][{j}] = {v} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self { c })
    }

    pub fn get(&self, decide: Hypothesis, truth: Hypothesis) -> f64 {
        self.c[decide.index()][truth.index()]
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.c
    }
}

/// The navigation-security uniform cost assignment.
pub fn uniform_cost() -> CostMatrix {
    CostMatrix::new([
        // truth:  H0   H1   H2   H3
        /* H0 */ [0.0, 0.2, 1.0, 0.9],
        /* H1 */ [0.1, 0.0, 1.0, 0.9],
        /* H2 */ [0.4, 0.4, 0.0, 0.2],
        /* H3 */ [0.4, 0.4, 0.2, 0.0],
    ])
    .expect("uniform cost matrix is valid")
}

/// Parameter-dependent cost of deciding `decide` when `theta` (a member of
/// `truth`'s parameter set) is the actual interference vector.
///
/// Overrides on top of [`uniform_cost`]:
///
/// * missing multipath costs `min(0.8, e_τ/0.3)`, where `e_τ` is the
///   code-phase error (chips) the echo induces through the tracking loop —
///   harmless multipath is free to ignore;
/// * close-in weak spoofing (`Δτ < τ_DLL` and `η < -1 dB`) is treated like
///   multipath: deciding `H0` costs the multipath formula and deciding `H1`
///   costs nothing. With the default set bounds (`η ≥ 1` linear inside the
///   spoofing set) the condition is unsatisfiable, so the branch only
///   activates under reconfigured bounds; it is kept as specified.
/// * missing jamming costs `min(0.9, η_dB/10)` whether the decision was
///   `H0` or `H1` — weak jamming is barely worth reporting.
pub fn theta_cost(
    decide: Hypothesis,
    theta: &InterferenceParams,
    truth: Hypothesis,
    tau_dll: f64,
) -> f64 {
    let base = uniform_cost();
    let uniform = base.get(decide, truth);
    match truth {
        Hypothesis::Multipath => {
            if decide == Hypothesis::Clean {
                multipath_miss_cost(theta)
            } else {
                uniform
            }
        }
        Hypothesis::Spoofing => {
            let eta_db = 10.0 * theta.eta.log10();
            let lenient = theta.delta_tau < tau_dll && eta_db < -1.0;
            match decide {
                Hypothesis::Clean if lenient => multipath_miss_cost(theta),
                Hypothesis::Multipath if lenient => 0.0,
                _ => uniform,
            }
        }
        Hypothesis::Jamming => match decide {
            Hypothesis::Clean | Hypothesis::Multipath => {
                let eta_db = 10.0 * theta.eta.log10();
                (eta_db / 10.0).min(base.get(Hypothesis::Clean, Hypothesis::Jamming))
            }
            _ => uniform,
        },
        Hypothesis::Clean => uniform,
    }
}

/// `min(0.8, e_τ(θ)/0.3)` with `e_τ = |τ̂(θ) - τ_A|` in chips. The code
/// phase estimate is scale-invariant in received power, so a unit power is
/// passed through.
fn multipath_miss_cost(theta: &InterferenceParams) -> f64 {
    let e_tau = estimate_code_phase(theta, 1.0).abs();
    (e_tau / 0.3).min(0.8)
}

/// Which cost function drives region construction and risk evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    Uniform,
    /// A caller-supplied uniform matrix replacing the built-in one.
    Matrix(CostMatrix),
    /// Parameter-dependent cost; carries the tracking tap offset the
    /// spoofing leniency test compares against.
    ThetaDependent {
        tau_dll: f64,
    },
}

impl CostModel {
    /// Cost of deciding `decide` against a tagged parameter vector.
    pub fn cost(&self, decide: Hypothesis, theta: &InterferenceParams, truth: Hypothesis) -> f64 {
        match *self {
            CostModel::Uniform => uniform_cost().get(decide, truth),
            CostModel::Matrix(m) => m.get(decide, truth),
            CostModel::ThetaDependent { tau_dll } => theta_cost(decide, theta, truth, tau_dll),
        }
    }

    /// All four decision costs for one tagged vector.
    pub fn cost_vector(&self, theta: &InterferenceParams, truth: Hypothesis) -> [f64; 4] {
        let mut out = [0.0; 4];
        for h in Hypothesis::ALL {
            out[h.index()] = self.cost(h, theta, truth);
        }
        out
    }
}
