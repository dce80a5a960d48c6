use num_traits::{Signed, Zero};
use stratcomm::engine::{brute_force_min_error, Engine, Game, SequenceEngine};
use stratcomm::model::Distribution;
use stratcomm::rational::{format_rational, int, rat};
use stratcomm::utility::UtilityMatrix;

use super::Suite;
use crate::error::CliResult;
use crate::report::{Check, Report};

/// Exact lossless recovery is impossible without a strictly negative swap sum.
pub struct PositiveErrorAtFiniteLength;

impl Suite for PositiveErrorAtFiniteLength {
    fn name(&self) -> &'static str {
        "theorem1"
    }

    fn description(&self) -> &'static str {
        "minimum pessimistic error over all decoders is positive for U=(1,-1) and (1,0), zero for all-negative U"
    }

    fn run(&self) -> CliResult<Report> {
        let mut checks = Vec::new();
        for (a, b) in [(1, -1), (1, 0)] {
            let u = UtilityMatrix::binary(int(a), int(b));
            for p in [rat(3, 10), rat(1, 2)] {
                let source = Distribution::binary(p.clone())?;
                let mut errors = Vec::new();
                let mut all_positive = true;
                for n in 1..=4 {
                    let r = brute_force_min_error(n, &source, &u, &int(0))?;
                    all_positive &= r.error.is_positive();
                    errors.push(format!("n={n}: {}", format_rational(&r.error)));
                }
                checks.push(Check::new(format!("positive_error_u01={a}_u10={b}_p={p}"), all_positive, errors.join(", ")));
            }
        }

        let u = UtilityMatrix::binary(int(-1), int(-2));
        let source = Distribution::binary(rat(3, 10))?;
        let mut ok = true;
        let mut detail = Vec::new();
        for n in 1..=4 {
            let r = brute_force_min_error(n, &source, &u, &int(0))?;
            let full = r.strategy.image_size() == (1u64 << n).into();
            let game = Game::pessimistic(u.clone(), source.clone(), int(0))?;
            let replay = SequenceEngine.evaluate(&game, &r.strategy)?.error_prob();
            ok &= r.error.is_zero() && full && replay.is_zero();
            detail.push(format!("n={n}: error {} image {}", format_rational(&r.error), r.strategy.image_size()));
        }
        checks.push(Check::new("all_negative_identity_decoder", ok, detail.join(", ")));
        Ok(Report::new(self.name(), checks))
    }
}
