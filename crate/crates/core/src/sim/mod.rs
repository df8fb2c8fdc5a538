//! Monte Carlo estimation of content outage under the full selection
//! pipeline, of conditional outage, and of empirical outage exponents.

mod conditional;
mod stats;
mod trial;

use rayon::prelude::*;
use thiserror::Error;

pub use conditional::{draw_conditional_mi, draw_conditional_power, simulate_conditional_outage, ConditionalConfig};
pub use stats::{estimate_exponent, fitted_exponent, wilson_interval, Z95};
pub use trial::TrialDiagnostics;

use crate::channel::{ap_outage_prob, ChannelError, SnrPoint};
use crate::coding::{code_parameters, CodeScheme, CodingError};
use crate::graph::GraphError;
use crate::matching::{FairnessPolicy, MatchingError, SolveMethod};
use crate::special::ln_binomial;
use trial::{run_trial, ForcedRow, PointContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} usable points, got {usable}")]
    InsufficientData { usable: usize, needed: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Coding(#[from] CodingError),
}

const CHUNK: u64 = 2048;

/// Trial counts: start at `initial`, double until `min_events` outages are
/// seen or `max` trials are spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialBudget {
    pub initial: u64,
    pub max: u64,
    pub min_events: u64,
}

impl TrialBudget {
    pub fn fixed(trials: u64) -> Self {
        Self { initial: trials, max: trials, min_events: 0 }
    }

    pub fn adaptive(initial: u64, max: u64) -> Self {
        Self { initial, max, min_events: 50 }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.initial == 0 || self.max < self.initial {
            return Err(SimError::InvalidConfig(format!("trial budget {} .. {} is empty", self.initial, self.max)));
        }
        Ok(())
    }

    /// Runs `batch(from, to)` over trial ranges, in parallel chunks, and
    /// returns `(events, trials)`.
    pub fn run<F: Fn(u64, u64) -> u64 + Sync>(&self, batch: F) -> (u64, u64) {
        let (events, trials, _) = self.run_with(|a, b| (batch(a, b), ()), |_, _| ());
        (events, trials)
    }

    pub(crate) fn run_with<T, F, M>(&self, batch: F, merge: M) -> (u64, u64, T)
    where
        T: Default + Send,
        F: Fn(u64, u64) -> (u64, T) + Sync,
        M: Fn(&mut T, T) + Sync + Send + Copy,
    {
        let mut done = 0;
        let mut events = 0;
        let mut acc = T::default();
        let mut size = self.initial;
        loop {
            let (from, to) = (done, done + size);
            let chunks: Vec<u64> = (from..to).step_by(CHUNK as usize).collect();
            let (e, extra) = chunks
                .into_par_iter()
                .map(|c| batch(c, (c + CHUNK).min(to)))
                .reduce(
                    || (0, T::default()),
                    |(e1, mut t1), (e2, t2)| {
                        merge(&mut t1, t2);
                        (e1 + e2, t1)
                    },
                );
            events += e;
            merge(&mut acc, extra);
            done = to;
            if events >= self.min_events || done >= self.max {
                break;
            }
            size = done.min(self.max - done);
        }
        (events, done, acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub trials: u64,
    pub events: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub std_err: f64,
}

/// Per-user content sizes in nats.
#[derive(Debug, Clone, PartialEq)]
pub enum RateMode {
    Fixed(Vec<f64>),
    /// Multiplexing gains: `R_m = r_m ln(snr)`, floored at zero.
    Multiplexing(Vec<f64>),
}

impl RateMode {
    pub fn rates_at(&self, snr: SnrPoint) -> Vec<f64> {
        match self {
            RateMode::Fixed(r) => r.clone(),
            RateMode::Multiplexing(r) => r.iter().map(|x| (x * snr.ln()).max(0.0)).collect(),
        }
    }

    fn len(&self) -> usize {
        match self {
            RateMode::Fixed(r) | RateMode::Multiplexing(r) => r.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Plain Monte Carlo for every user.
    Plain,
    /// One user's curve, stratified on how many of its links are in outage.
    /// Each stratum gets its own trial budget.
    Stratified { user: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub aps: usize,
    pub capacity: usize,
    pub demand: Vec<usize>,
    pub rates: RateMode,
    pub scheme: CodeScheme,
    /// Repair degree for regenerating codes; defaults to `K`.
    pub repair_degree: Option<usize>,
    pub snr_db: Vec<f64>,
    pub budget: TrialBudget,
    pub seed: u64,
    pub policy: FairnessPolicy,
    pub solver: SolveMethod,
    pub estimator: Estimator,
    pub greedy_shortcut: bool,
}

impl ExperimentConfig {
    /// Homogeneous `M` users with demand `K` and fixed rate `R`, MSR code,
    /// plain estimator, max-weight flow solver.
    pub fn homogeneous(users: usize, aps: usize, capacity: usize, demand: usize, rate: f64, snr_db: Vec<f64>, seed: u64) -> Self {
        Self {
            aps,
            capacity,
            demand: vec![demand; users],
            rates: RateMode::Fixed(vec![rate; users]),
            scheme: CodeScheme::Msr,
            repair_degree: None,
            snr_db,
            budget: TrialBudget::fixed(10_000),
            seed,
            policy: FairnessPolicy::new(0.5, 0.5, seed).expect("constant policy"),
            solver: SolveMethod::MaxWeight,
            estimator: Estimator::Plain,
            greedy_shortcut: true,
        }
    }

    pub fn users(&self) -> usize {
        self.demand.len()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let m = self.users();
        if m == 0 || self.aps == 0 {
            return Err(SimError::InvalidConfig("need at least one user and one AP".into()));
        }
        // the instance constructor owns the demand checks
        crate::graph::BipartiteInstance::new(crate::bitmatrix::BitMatrix::new(m, self.aps), self.demand.clone(), self.capacity)?;
        if self.rates.len() != m {
            return Err(SimError::InvalidConfig(format!("{} rates for {m} users", self.rates.len())));
        }
        let rates = match &self.rates {
            RateMode::Fixed(r) | RateMode::Multiplexing(r) => r,
        };
        if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(SimError::InvalidConfig("rates must be finite and non-negative".into()));
        }
        if let RateMode::Multiplexing(r) = &self.rates {
            if let Some(i) = (0..m).find(|&i| r[i] > self.demand[i] as f64) {
                return Err(SimError::InvalidConfig(format!("multiplexing gain {} of user {i} exceeds K = {}", r[i], self.demand[i])));
            }
        }
        if self.snr_db.is_empty() || self.snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SimError::InvalidConfig("SNR grid must be non-empty and strictly increasing".into()));
        }
        for &db in &self.snr_db {
            SnrPoint::from_db(db)?;
        }
        self.budget.validate()?;
        self.policy.validate(m, self.aps)?;
        if let Estimator::Stratified { user } = self.estimator {
            if user >= m {
                return Err(SimError::InvalidConfig(format!("stratified user {user} out of range")));
            }
        }
        for (i, &k) in self.demand.iter().enumerate() {
            let d = self.repair_degree.unwrap_or(k);
            code_parameters(self.scheme, 1.0, self.aps, k, d).map_err(|e| match e {
                CodingError::InvalidDimensions(msg) => CodingError::InvalidDimensions(format!("user {i}: {msg}")),
                other => other,
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub rate: f64,
    pub estimate: Estimate,
    pub diagnostics: TrialDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageCurve {
    pub user: usize,
    pub points: Vec<OutagePoint>,
}

impl OutageCurve {
    pub fn as_pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.snr_db, p.estimate.estimate)).collect()
    }

    /// Local exponents of the estimated curve.
    pub fn exponents(&self) -> Result<Vec<Option<f64>>, SimError> {
        estimate_exponent(&self.as_pairs())
    }
}

fn fragment_size(scheme: CodeScheme, rate: f64, aps: usize, k: usize, d: Option<usize>) -> Result<f64, SimError> {
    if rate == 0.0 {
        return Ok(0.0);
    }
    Ok(code_parameters(scheme, rate, aps, k, d.unwrap_or(k))?.alpha)
}

#[derive(Default)]
struct BatchOut {
    counts: Vec<u64>,
    diag: TrialDiagnostics,
    error: Option<SimError>,
}

fn merge(a: &mut BatchOut, b: BatchOut) {
    if a.counts.len() < b.counts.len() {
        a.counts.resize(b.counts.len(), 0);
    }
    for (x, y) in a.counts.iter_mut().zip(&b.counts) {
        *x += y;
    }
    a.diag.add(&b.diag);
    if a.error.is_none() {
        a.error = b.error;
    }
}

fn run_block(
    ctx: &PointContext<'_>,
    budget: &TrialBudget,
    forced: Option<(usize, usize, u64)>,
    watch: &[usize],
) -> Result<(Vec<u64>, u64, TrialDiagnostics), SimError> {
    let batch = |from: u64, to: u64| -> (u64, BatchOut) {
        let mut out = BatchOut { counts: vec![0; watch.len()], ..Default::default() };
        let mut flags = vec![false; watch.len()];
        for t in from..to {
            let (key, row) = match forced {
                Some((user, outages, tag)) => (tag << 40 | t, Some(ForcedRow { user, outages })),
                None => (t, None),
            };
            if let Err(e) = run_trial(ctx, key, row, watch, &mut flags, &mut out.diag) {
                out.error.get_or_insert(e);
                break;
            }
            for (c, &f) in out.counts.iter_mut().zip(&flags) {
                *c += f as u64;
            }
        }
        // escalation follows the first watched user
        (out.counts[0], out)
    };
    let (_, trials, out) = budget.run_with(batch, merge);
    if let Some(e) = out.error {
        return Err(e);
    }
    let mut counts = out.counts;
    counts.resize(watch.len(), 0);
    Ok((counts, trials, out.diag))
}

fn plain_estimate(events: u64, trials: u64) -> Estimate {
    let p = events as f64 / trials as f64;
    let (ci_lo, ci_hi) = wilson_interval(events, trials, Z95);
    Estimate { estimate: p, trials, events, ci_lo, ci_hi, std_err: (p * (1.0 - p) / trials as f64).sqrt() }
}

/// Runs the whole pipeline at every SNR point: fading draws, 1-bit CSI,
/// fairness b-matching, completion, and the delivered-information test.
pub fn simulate_content_outage(cfg: &ExperimentConfig) -> Result<Vec<OutageCurve>, SimError> {
    cfg.validate()?;
    let m = cfg.users();
    let watch: Vec<usize> = match cfg.estimator {
        Estimator::Plain => (0..m).collect(),
        Estimator::Stratified { user } => vec![user],
    };
    let mut curves: Vec<OutageCurve> = watch.iter().map(|&u| OutageCurve { user: u, points: Vec::new() }).collect();
    for (gi, &db) in cfg.snr_db.iter().enumerate() {
        let snr = SnrPoint::from_db(db)?;
        let rates = cfg.rates.rates_at(snr);
        let mut links = Vec::with_capacity(m);
        let mut targets = Vec::with_capacity(m);
        for u in 0..m {
            let alpha = fragment_size(cfg.scheme, rates[u], cfg.aps, cfg.demand[u], cfg.repair_degree)?;
            links.push(ap_outage_prob(alpha, snr)?);
            targets.push(cfg.demand[u] as f64 * alpha);
        }
        let ctx = PointContext {
            seed: cfg.seed,
            point: gi as u64,
            snr,
            aps: cfg.aps,
            capacity: cfg.capacity,
            demand: &cfg.demand,
            links,
            targets,
            policy: cfg.policy,
            solver: cfg.solver,
            greedy_shortcut: cfg.greedy_shortcut,
        };
        match cfg.estimator {
            Estimator::Plain => {
                let (counts, trials, diag) = run_block(&ctx, &cfg.budget, None, &watch)?;
                for (c, curve) in counts.iter().zip(curves.iter_mut()) {
                    curve.points.push(OutagePoint { snr_db: db, rate: rates[curve.user], estimate: plain_estimate(*c, trials), diagnostics: diag });
                }
            }
            Estimator::Stratified { user } => {
                let est = stratified(&ctx, &cfg.budget, user)?;
                curves[0].points.push(OutagePoint { snr_db: db, rate: rates[user], estimate: est.0, diagnostics: est.1 });
            }
        }
    }
    Ok(curves)
}

/// `sum_e P(e) p_e` over the number `e` of outage links in the user's row,
/// `e ~ Binomial(N, p)`; each stratum is estimated on its own.
fn stratified(ctx: &PointContext<'_>, budget: &TrialBudget, user: usize) -> Result<(Estimate, TrialDiagnostics), SimError> {
    let n = ctx.aps;
    let link = ctx.links[user];
    let mut est = 0.0;
    let mut var = 0.0;
    let (mut lo, mut hi) = (0.0, 0.0);
    let (mut trials, mut events) = (0u64, 0u64);
    let mut diag = TrialDiagnostics::default();
    for e in 0..=n {
        let ln_w = ln_binomial(n as u64, e as u64) + e as f64 * link.ln_p() + (n - e) as f64 * link.ln_q();
        let w = ln_w.exp();
        if !(w > 0.0) {
            continue;
        }
        let (counts, t, d) = run_block(ctx, budget, Some((user, e, e as u64 + 1)), &[user])?;
        diag.add(&d);
        let pe = plain_estimate(counts[0], t);
        est += w * pe.estimate;
        var += w * w * pe.std_err * pe.std_err;
        lo += w * pe.ci_lo;
        hi += w * pe.ci_hi;
        trials += t;
        events += counts[0];
    }
    let estimate = est.clamp(0.0, 1.0);
    Ok((
        Estimate { estimate, trials, events, ci_lo: lo.min(estimate), ci_hi: hi.max(estimate).min(1.0), std_err: var.sqrt() },
        diag,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_never_fails() {
        let mut cfg = ExperimentConfig::homogeneous(3, 3, 2, 2, 0.0, vec![0.0, 10.0], 1);
        cfg.budget = TrialBudget::fixed(500);
        for c in simulate_content_outage(&cfg).unwrap() {
            assert!(c.points.iter().all(|p| p.estimate.events == 0));
        }
    }

    #[test]
    fn single_link_matches_closed_form() {
        let mut cfg = ExperimentConfig::homogeneous(1, 1, 1, 1, 1.0, vec![0.0, 5.0, 10.0], 2);
        cfg.budget = TrialBudget::fixed(40_000);
        let c = &simulate_content_outage(&cfg).unwrap()[0];
        for p in &c.points {
            let g = 10f64.powf(p.snr_db / 10.0);
            let exact = -(-(1f64.exp_m1()) / g).exp_m1();
            assert!((p.estimate.estimate - exact).abs() < 3.0 * p.estimate.std_err + 1e-12, "{p:?} vs {exact}");
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let mut cfg = ExperimentConfig::homogeneous(4, 3, 3, 2, 2.0, vec![0.0, 10.0], 9);
        cfg.budget = TrialBudget::fixed(3000);
        assert_eq!(simulate_content_outage(&cfg).unwrap(), simulate_content_outage(&cfg).unwrap());
    }

    #[test]
    fn rejects_bad_grid() {
        let cfg = ExperimentConfig::homogeneous(2, 2, 2, 1, 1.0, vec![10.0, 5.0], 0);
        assert!(matches!(simulate_content_outage(&cfg), Err(SimError::InvalidConfig(_))));
        let cfg = ExperimentConfig::homogeneous(2, 5, 4, 7, 1.0, vec![10.0], 0);
        assert!(matches!(simulate_content_outage(&cfg), Err(SimError::Graph(_))));
    }
}
