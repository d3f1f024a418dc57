use serde::{Deserialize, Serialize};

use crate::domain::ComparisonExample;
use crate::model::{compare, forest_compare, ComparisonOutcome, Model, VotingRule};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleOutcome {
    Agreed,
    Disagreed,
    Undecided,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalStats {
    pub total: usize,
    pub agreed: usize,
    pub disagreed: usize,
    pub undecided: usize,
    pub outcomes: Vec<ExampleOutcome>,
}

impl EvalStats {
    /// `agreed / total`, or 1 with no examples.
    pub fn accuracy<S: Scalar>(&self) -> S {
        if self.total == 0 {
            return S::one();
        }
        S::ratio(self.agreed as u128, self.total as u128)
    }

    /// `agreed / (agreed + disagreed)`; undecided examples are left out.
    pub fn training_accuracy<S: Scalar>(&self) -> S {
        let decided = self.agreed + self.disagreed;
        if decided == 0 {
            return S::one();
        }
        S::ratio(self.agreed as u128, decided as u128)
    }
}

pub fn evaluate(model: &Model, examples: &[ComparisonExample]) -> EvalStats {
    let mut stats = EvalStats {
        total: examples.len(),
        outcomes: Vec::with_capacity(examples.len()),
        ..EvalStats::default()
    };
    for e in examples {
        let outcome = match model {
            Model::Tree(t) => compare(t, &e.better, &e.worse),
            Model::Forest(f) => forest_compare(f, &e.better, &e.worse, VotingRule::PairwiseMajority),
        };
        let o = match outcome {
            ComparisonOutcome::FirstPreferred => {
                stats.agreed += 1;
                ExampleOutcome::Agreed
            }
            ComparisonOutcome::SecondPreferred => {
                stats.disagreed += 1;
                ExampleOutcome::Disagreed
            }
            ComparisonOutcome::Equivalent => {
                stats.undecided += 1;
                ExampleOutcome::Undecided
            }
        };
        stats.outcomes.push(o);
    }
    stats
}
