//! Born-rule probability functions on a context, propensity tables and
//! seeded actualization sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numfmt::fmt_num;
use crate::operator::{spectral_decompose, Csop, DensityState, HermitianOperator, PROJECTOR_TOL};

/// Round-off excursions outside `[0, 1]` up to this size are clamped.
pub const CLAMP_WINDOW: f64 = 1e-12;
/// A table may sum to `1 ± TABLE_TOL`.
pub const TABLE_TOL: f64 = 1e-9;
/// Draws per random stream in frequency runs.
pub const BATCH_SIZE: u64 = 1 << 16;

fn clamp_probability(x: f64) -> Result<f64> {
    if (-CLAMP_WINDOW..=1.0 + CLAMP_WINDOW).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(Error::ProbabilityOutOfRange { value: x })
    }
}

/// `Tr(ρP)` for a projector `P`.
pub fn born_probability(rho: &DensityState, p: &HermitianOperator) -> Result<f64> {
    if p.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: p.dim(),
        });
    }
    let idem = (p.matrix() * p.matrix() - p.matrix()).norm();
    if idem > PROJECTOR_TOL {
        return Err(Error::NotProjector { idempotency: idem });
    }
    clamp_probability(rho.expectation(p.matrix()).re)
}

/// Probability that `A` takes eigenvalue `a_k`, summed over its eigenspace.
pub fn event_probability(
    rho: &DensityState,
    a: &HermitianOperator,
    a_k: f64,
    cluster_tol: f64,
) -> Result<f64> {
    let sd = spectral_decompose(a, cluster_tol)?;
    let tol = cluster_tol * a.norm().max(1.0);
    match sd.cluster_of(a_k, tol) {
        Some(k) => born_probability(rho, &sd.projectors()[k]),
        None => {
            let nearest = sd
                .eigenvalues()
                .iter()
                .copied()
                .min_by(|x, y| (x - a_k).abs().total_cmp(&(y - a_k).abs()))
                .unwrap_or(f64::NAN);
            Err(Error::NotAnEigenvalue {
                value: a_k,
                nearest,
            })
        }
    }
}

fn check_event(event: &[usize], atoms: usize) -> Result<()> {
    let mut seen = vec![false; atoms];
    for &j in event {
        if j >= atoms {
            return Err(Error::InvalidArgument(format!(
                "event index {j} out of range for {atoms} atoms"
            )));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidArgument(format!("event lists atom {j} twice")));
        }
    }
    Ok(())
}

/// The Boolean algebra generated by a CSOP. Events are subsets of atom indices.
#[derive(Clone, Debug)]
pub struct BooleanContext {
    csop: Csop,
}

impl BooleanContext {
    pub fn new(csop: Csop) -> Self {
        Self { csop }
    }

    pub fn atoms(&self) -> usize {
        self.csop.len()
    }

    pub fn csop(&self) -> &Csop {
        &self.csop
    }

    pub fn universe(&self) -> Vec<usize> {
        (0..self.atoms()).collect()
    }

    pub fn event_projector(&self, event: &[usize]) -> Result<HermitianOperator> {
        check_event(event, self.atoms())?;
        Ok(HermitianOperator::from_trusted(
            self.csop.event_projector(event),
            "event",
        ))
    }

    /// `f_ρ(event) = Tr(ρ Σ_{J∈event} Π_J)`, computed from the materialized projector.
    pub fn probability(&self, rho: &DensityState, event: &[usize]) -> Result<f64> {
        born_probability(rho, &self.event_projector(event)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropensityTable {
    atom_measures: Vec<f64>,
    #[serde(skip)]
    state: Option<DensityState>,
    #[serde(skip)]
    context: Option<Csop>,
}

impl PropensityTable {
    /// A bare table of measures, validated to lie in `[0,1]` and sum to one.
    pub fn from_measures(measures: Vec<f64>) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::InvalidArgument("empty propensity table".into()));
        }
        let measures = measures
            .into_iter()
            .map(clamp_probability)
            .collect::<Result<Vec<_>>>()?;
        let table = Self {
            atom_measures: measures,
            state: None,
            context: None,
        };
        table.check_normalized()?;
        Ok(table)
    }

    fn check_normalized(&self) -> Result<()> {
        let sum = self.sum();
        if (sum - 1.0).abs() > TABLE_TOL {
            return Err(Error::UnnormalizedTable { sum });
        }
        Ok(())
    }

    pub fn measures(&self) -> &[f64] {
        &self.atom_measures
    }

    pub fn len(&self) -> usize {
        self.atom_measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_measures.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.atom_measures.iter().sum()
    }

    pub fn state(&self) -> Option<&DensityState> {
        self.state.as_ref()
    }

    pub fn context(&self) -> Option<&Csop> {
        self.context.as_ref()
    }

    /// Additive measure of an event given as atom indices.
    pub fn event_measure(&self, event: &[usize]) -> Result<f64> {
        check_event(event, self.len())?;
        clamp_probability(event.iter().map(|&j| self.atom_measures[j]).sum())
    }
}

pub fn propensity_table(rho: &DensityState, csop: &Csop) -> Result<PropensityTable> {
    if csop.is_empty() || csop.dim() != rho.dim() {
        return Err(Error::InvalidCsop(format!(
            "context acts on dimension {}, state on {}",
            if csop.is_empty() { 0 } else { csop.dim() },
            rho.dim()
        )));
    }
    let atom_measures = csop
        .projectors()
        .iter()
        .map(|p| born_probability(rho, p))
        .collect::<Result<Vec<_>>>()?;
    let table = PropensityTable {
        atom_measures,
        state: Some(rho.clone()),
        context: Some(csop.clone()),
    };
    table.check_normalized()?;
    Ok(table)
}

/// Inverse-CDF sampler over the atoms of a table.
#[derive(Clone, Debug)]
pub struct AtomSampler {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl AtomSampler {
    pub fn new(table: &PropensityTable) -> Result<Self> {
        table.check_normalized()?;
        let mut acc = 0.0;
        let cdf: Vec<f64> = table
            .measures()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = table
            .measures()
            .iter()
            .rposition(|&p| p > 0.0)
            .ok_or(Error::UnnormalizedTable { sum: 0.0 })?;
        Ok(Self { cdf, last_positive })
    }

    /// First atom whose cumulative measure exceeds a uniform variate. Zero-measure
    /// atoms have no CDF jump and can never be returned.
    pub fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u = rng.random::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.last_positive)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActualizationRecord {
    pub chosen_atom: usize,
    pub seed: u64,
    pub stream: u64,
}

impl ActualizationRecord {
    /// An event is actual iff it contains the chosen atom.
    pub fn is_actual(&self, event: &[usize]) -> bool {
        event.contains(&self.chosen_atom)
    }
}

pub fn sample_actualization(table: &PropensityTable, seed: u64) -> Result<ActualizationRecord> {
    sample_actualization_stream(table, seed, 0)
}

pub fn sample_actualization_stream(
    table: &PropensityTable,
    seed: u64,
    stream: u64,
) -> Result<ActualizationRecord> {
    let sampler = AtomSampler::new(table)?;
    let chosen_atom = sampler.draw(&mut stream_rng(seed, stream));
    Ok(ActualizationRecord {
        chosen_atom,
        seed,
        stream,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub counts: Vec<u64>,
    pub n_trials: u64,
    pub seed: u64,
    pub stream_base: u64,
}

impl FrequencyTable {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&k| k as f64 / self.n_trials as f64)
            .collect()
    }

    /// Binomial standard error `√(f(1−f)/n)` per atom.
    pub fn stderr(&self) -> Vec<f64> {
        let n = self.n_trials as f64;
        self.frequencies()
            .iter()
            .map(|f| (f * (1.0 - f) / n).sqrt())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("atom,count,frequency,stderr\n");
        for ((i, k), (f, e)) in self
            .counts
            .iter()
            .enumerate()
            .zip(self.frequencies().into_iter().zip(self.stderr()))
        {
            out.push_str(&format!("{i},{k},{},{}\n", fmt_num(f), fmt_num(e)));
        }
        out
    }
}

/// `n_trials` draws split into fixed batches; batch `b` uses stream
/// `stream_base·2³² + b`, so counts do not depend on thread scheduling.
pub fn frequency_from_table(
    table: &PropensityTable,
    n_trials: u64,
    seed: u64,
    stream_base: u64,
) -> Result<FrequencyTable> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    let sampler = AtomSampler::new(table)?;
    let atoms = table.len();
    let batches = n_trials.div_ceil(BATCH_SIZE);
    let counts = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, (stream_base << 32) + b);
            let draws = BATCH_SIZE.min(n_trials - b * BATCH_SIZE);
            let mut local = vec![0u64; atoms];
            for _ in 0..draws {
                local[sampler.draw(&mut rng)] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; atoms],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(FrequencyTable {
        counts,
        n_trials,
        seed,
        stream_base,
    })
}

pub fn frequency_estimate(
    rho: &DensityState,
    csop: &Csop,
    n_trials: u64,
    seed: u64,
) -> Result<FrequencyTable> {
    frequency_from_table(&propensity_table(rho, csop)?, n_trials, seed, 0)
}
