//! Alternation between controller synthesis at a fixed multiplier and joint
//! storage/multiplier analysis at a fixed controller.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{bisect_rate, AnalysisOptions, BisectionOptions, LambdaMode, RateOutcome};
use crate::model::SwitchedPlant;
use crate::regulation::RegulatorSolution;
use crate::synthesis::{bisect_synthesis, SynthesisOptions, SynthesisOutcome, SynthesisResult};
use crate::transforms::{FilterCoefficients, SectorSpec};
use crate::Result;

pub const MIN_IMPROVEMENT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Synthesis,
    Analysis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub phase: Phase,
    /// Rate reached by this phase (`None` if it failed).
    pub rho: Option<f64>,
    pub lambda: FilterCoefficients,
    pub order: usize,
    /// Best rate held after this phase.
    pub incumbent: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlternationTrace {
    pub records: Vec<TraceRecord>,
}

impl AlternationTrace {
    pub fn write_json_lines(&self, mut w: impl Write) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Incumbent rates after each phase.
    pub fn incumbents(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.incumbent).collect()
    }
}

#[derive(Clone, Debug)]
pub struct AlternationOptions {
    pub order: usize,
    pub iter_max: usize,
    pub common_storage: bool,
    pub bisection: BisectionOptions,
}

#[derive(Clone, Debug)]
pub struct AlternationOutcome {
    /// Best controller; its `rho` and `lambda` are the best certified pair.
    pub result: Option<SynthesisResult>,
    pub trace: AlternationTrace,
}

pub fn run_alternation(
    plant: &SwitchedPlant,
    sol: &RegulatorSolution,
    sector: SectorSpec,
    opts: &AlternationOptions,
) -> Result<AlternationOutcome> {
    let mut trace = AlternationTrace::default();
    let mut best: Option<SynthesisResult> = None;
    let mut lambda = FilterCoefficients::identity(0);
    let mut previous = f64::INFINITY;
    for it in 1..=opts.iter_max {
        let syn = bisect_synthesis(plant, sol, sector, &SynthesisOptions::new(lambda.clone(), opts.common_storage), opts.bisection)?;
        let current = match syn {
            SynthesisOutcome::Diverged => {
                trace.records.push(TraceRecord {
                    iteration: it,
                    phase: Phase::Synthesis,
                    rho: None,
                    lambda: lambda.clone(),
                    order: 0,
                    incumbent: best.as_ref().map(|b| b.rho),
                });
                break;
            }
            SynthesisOutcome::Synthesized(r) => *r,
        };
        if best.as_ref().is_none_or(|b| current.rho <= b.rho) {
            best = Some(current.clone());
        }
        trace.records.push(TraceRecord {
            iteration: it,
            phase: Phase::Synthesis,
            rho: Some(current.rho),
            lambda: lambda.clone(),
            order: current.order(),
            incumbent: best.as_ref().map(|b| b.rho),
        });

        let aopts = AnalysisOptions::new(LambdaMode::free(opts.order), opts.common_storage);
        let ana = bisect_rate(&current.closed_loop, sector, &aopts, opts.bisection)?;
        let ana_rho = ana.rho();
        if let RateOutcome::Certified(cert) = ana {
            if best.as_ref().is_none_or(|b| cert.rho <= b.rho) {
                let mut adopted = current.clone();
                adopted.rho = cert.rho;
                adopted.lambda = cert.lambda.clone();
                adopted.storages = cert.storages.clone();
                adopted.margin = cert.margin;
                best = Some(adopted);
            }
            lambda = cert.lambda;
        }
        trace.records.push(TraceRecord {
            iteration: it,
            phase: Phase::Analysis,
            rho: ana_rho,
            lambda: lambda.clone(),
            order: current.order(),
            incumbent: best.as_ref().map(|b| b.rho),
        });
        let now = best.as_ref().map_or(f64::INFINITY, |b| b.rho);
        if previous - now < MIN_IMPROVEMENT {
            break;
        }
        previous = now;
    }
    Ok(AlternationOutcome { result: best, trace })
}
