//! Experiment orchestration: config-driven runs and figure sweeps.

use std::fmt;
use std::str::FromStr;

use corrmimo_core::channel::{matching_metric_tx, matching_sweep_family, CanonicalModel, ChannelModel, SeparableModel};
use corrmimo_core::exec::TrialExecutor;
use corrmimo_core::link::Constellation;
use corrmimo_core::matcore::RMatrix;
use corrmimo_core::metrics::{estimate_delta, estimate_scheme, spearman, DeltaSpec, MCEstimate, Scheme};
use corrmimo_core::precoding::{optimize_stat_power, stat_threshold_snr, StatPowerOptions};
use corrmimo_core::rng::{stream, sub_seed};
use corrmimo_core::{db_to_linear, linear_to_db};

use crate::config::{ResolvedScheme, ValidatedConfig};
use crate::csv::SweepRow;
use crate::CliError;

/// −10 to 30 dB in steps of 2.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=20).map(|i| -10.0 + 2.0 * i as f64).collect()
}

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_FAMILY: usize = 1700;
pub const FIG2_SNR_DB: [f64; 3] = [-10.0, 0.0, 10.0];
pub const FIG3_RECEIVE: [usize; 5] = [4, 8, 16, 32, 64];
pub const FIG3_SNR_DB: f64 = 10.0;
pub const FIG4_ALPHA: f64 = 2.0;
pub const FIG4A_LAMBDA_T: [f64; 4] = [9.80, 5.66, 0.45, 0.09];
pub const FIG4A_LAMBDA_R: [f64; 4] = [8.58, 4.20, 1.98, 1.24];
pub const FIG4B_PROFILE: [[f64; 4]; 4] = [
    [1.66, 0.31, 1.71, 0.31],
    [2.24, 0.18, 0.15, 0.54],
    [1.97, 1.46, 0.70, 0.28],
    [1.65, 1.65, 0.49, 0.71],
];

// Seed index reserved for anything that is not a Monte Carlo trial.
const AUX: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4a, Figure::Fig4b];

    pub fn as_str(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Figure {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("field `figure`: unknown figure `{s}` (expected fig1, fig2, fig3, fig4a or fig4b)")))
    }
}

/// Sweep settings; `None` falls back to the flagged defaults.
#[derive(Debug, Clone, Default)]
pub struct ReproduceOptions {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub family: Option<usize>,
}

struct Settings {
    trials: usize,
    seed: u64,
    meta: Vec<SweepRow>,
    name: &'static str,
}

impl Settings {
    fn new(fig: Figure, o: &ReproduceOptions) -> Result<Self, CliError> {
        let trials = o.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(CliError::Config("field `trials`: must be at least 1".into()));
        }
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let name = fig.as_str();
        let meta = vec![
            SweepRow::meta(name, "trials", &trials.to_string(), o.trials.is_none(), trials, seed),
            SweepRow::meta(name, "seed", &seed.to_string(), o.seed.is_none(), trials, seed),
        ];
        Ok(Self { trials, seed, meta, name })
    }

    fn meta(&mut self, key: &str, value: &str, default: bool) {
        self.meta.push(SweepRow::meta(self.name, key, value, default, self.trials, self.seed));
    }

    fn row(&self, snr_db: f64, scheme: &str, metric: &str, e: MCEstimate) -> SweepRow {
        SweepRow::value(self.name, snr_db, scheme, metric, e.mean, e.stderr, e.trials, self.seed)
    }
}

fn separable(lambda_t: &[f64], lambda_r: &[f64]) -> Result<ChannelModel, CliError> {
    Ok(SeparableModel::diagonal(lambda_t.to_vec(), lambda_r.to_vec())?.into())
}

fn exact(x: f64) -> MCEstimate {
    MCEstimate { mean: x, stderr: 0.0, trials: 1 }
}

/// Channel models used by the figure sweeps.
pub fn fig1_models() -> [(&'static str, ChannelModel); 2] {
    [
        ("matched", separable(&[8.0, 8.0, 0.0, 0.0], &[4.0; 4]).expect("valid")),
        ("mismatched", separable(&[4.0; 4], &[4.0; 4]).expect("valid")),
    ]
}

pub fn fig3_model(n_r: usize) -> ChannelModel {
    separable(&[1.0; 4], &vec![4.0 / n_r as f64; n_r]).expect("valid")
}

pub fn fig4a_model() -> ChannelModel {
    separable(&FIG4A_LAMBDA_T, &FIG4A_LAMBDA_R).expect("valid")
}

pub fn fig4b_model() -> ChannelModel {
    let rows: Vec<Vec<f64>> = FIG4B_PROFILE.iter().map(|r| r.to_vec()).collect();
    CanonicalModel::diagonal(RMatrix::from_rows(&rows).expect("square")).expect("valid").into()
}

/// The transmit-eigenvalue family swept in fig2.
pub fn fig2_family(count: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    Ok(matching_sweep_family(4, 2, 16.0, count, &mut stream(seed, AUX))?)
}

pub fn fig2_member_seed(seed: u64, member: usize) -> u64 {
    sub_seed(seed, member as u64)
}

fn semi_delta(rho: f64, trials: usize, seed: u64) -> DeltaSpec {
    DeltaSpec {
        m: 2,
        rho,
        benchmark: Scheme::PerfUnconst,
        test: Scheme::StatSemi,
        constellation: Constellation::qpsk(),
        trials,
        seed,
    }
}

pub fn reproduce<E: TrialExecutor>(fig: Figure, opts: &ReproduceOptions, exec: &E) -> Result<Vec<SweepRow>, CliError> {
    let mut s = Settings::new(fig, opts)?;
    let mut rows = Vec::new();
    match fig {
        Figure::Fig1 => {
            s.meta("snr_grid_db", "-10:2:30", true);
            s.meta("m", "2", false);
            for db in default_snr_grid() {
                let rho = db_to_linear(db);
                for (name, model) in fig1_models() {
                    for (tag, scheme) in [("perf", Scheme::PerfUnconst), ("stat", Scheme::StatSemi)] {
                        let r = estimate_scheme(&model, &scheme, 2, rho, Constellation::qpsk(), s.trials, s.seed, exec)?;
                        rows.push(s.row(db, &format!("{name}-{tag}"), "mutual_info", r.mutual_info));
                    }
                }
            }
        }
        Figure::Fig2 => {
            let count = opts.family.unwrap_or(DEFAULT_FAMILY);
            if count == 0 {
                return Err(CliError::Config("field `family`: must be at least 1".into()));
            }
            let family = fig2_family(count, s.seed)?;
            s.meta("family", &family.len().to_string(), opts.family.is_none());
            s.meta("benchmark", "perf_unconst", false);
            s.meta("constellation", "qpsk", false);
            let mt: Vec<f64> = family.iter().map(|lt| matching_metric_tx(lt, 2)).collect::<Result<_, _>>()?;
            for db in FIG2_SNR_DB {
                let rho = db_to_linear(db);
                let (mut di, mut dp) = (Vec::new(), Vec::new());
                for (c, lt) in family.iter().enumerate() {
                    let model = separable(lt, &[4.0; 4])?;
                    let r = estimate_delta(&model, &semi_delta(rho, s.trials, fig2_member_seed(s.seed, c)), exec)?;
                    let label = format!("member_{c:04}");
                    rows.push(s.row(db, &label, "matching_metric_tx", exact(mt[c])));
                    rows.push(s.row(db, &label, "delta_i_semi", r.delta_i));
                    rows.push(s.row(db, &label, "delta_p_semi", r.delta_p));
                    rows.push(s.row(db, &label, "delta_p_any_semi", r.delta_p_any));
                    di.push(r.delta_i.mean);
                    dp.push(r.delta_p.mean);
                }
                if family.len() >= 2 {
                    rows.push(s.row(db, "family", "spearman_mt_delta_i_semi", exact(spearman(&mt, &di)?)));
                    rows.push(s.row(db, "family", "spearman_mt_delta_p_semi", exact(spearman(&mt, &dp)?)));
                }
            }
        }
        Figure::Fig3 => {
            s.meta("snr_db", "10", true);
            s.meta("benchmark", "perf_unconst", false);
            s.meta("constellation", "qpsk", false);
            let rho = db_to_linear(FIG3_SNR_DB);
            for n_r in FIG3_RECEIVE {
                let model = fig3_model(n_r);
                let r = estimate_delta(&model, &semi_delta(rho, s.trials, s.seed), exec)?;
                let label = format!("stat_semi@nr={n_r}");
                rows.push(s.row(FIG3_SNR_DB, &label, "delta_i_semi", r.delta_i));
                rows.push(s.row(FIG3_SNR_DB, &label, "delta_p_semi", r.delta_p));
            }
        }
        Figure::Fig4a | Figure::Fig4b => {
            let model = if fig == Figure::Fig4a { fig4a_model() } else { fig4b_model() };
            let snr_t = stat_threshold_snr(&model.lambda_t(), 2, FIG4_ALPHA)?;
            s.meta("snr_grid_db", "-10:2:30", true);
            s.meta("alpha", "2", true);
            s.meta("snr_threshold_db", &crate::csv::fmt_sig(linear_to_db(snr_t)), false);
            let schemes = [Scheme::StatFixed { alpha: FIG4_ALPHA }, Scheme::StatSemi, Scheme::PerfSemi];
            for db in default_snr_grid() {
                let rho = db_to_linear(db);
                for scheme in &schemes {
                    let r = estimate_scheme(&model, scheme, 2, rho, Constellation::qpsk(), s.trials, s.seed, exec)?;
                    rows.push(s.row(db, scheme.name(), "mutual_info", r.mutual_info));
                }
            }
        }
    }
    let mut out = s.meta;
    out.extend(rows);
    Ok(out)
}

/// Resolves a scheme at one SNR point. The statistical power optimizer runs
/// on its own seeded sample batch.
fn resolve_at(
    scheme: &ResolvedScheme,
    model: &ChannelModel,
    m: usize,
    rho: f64,
    seed: u64,
    strict: bool,
    notes: &mut Vec<String>,
) -> Result<Scheme, CliError> {
    match scheme {
        ResolvedScheme::Fixed(s) => Ok(s.clone()),
        ResolvedScheme::StatOpt { batch, max_iters } => {
            let opts = StatPowerOptions { batch: *batch, max_iters: *max_iters, ..StatPowerOptions::default() };
            let r = optimize_stat_power(model, m, rho, &opts, &mut stream(seed, AUX))?;
            if !r.converged {
                let msg = format!("stat_opt did not converge in {} iterations at rho = {}", r.iterations, rho);
                if strict {
                    return Err(CliError::Numerical(msg));
                }
                notes.push(msg);
            }
            Ok(Scheme::StatLoaded { lambda: r.lambda })
        }
    }
}

fn finite(e: MCEstimate, what: &str, strict: bool) -> Result<MCEstimate, CliError> {
    if strict && !e.mean.is_finite() {
        return Err(CliError::Numerical(format!("{what} is not finite")));
    }
    Ok(e)
}

/// Executes a validated config. Non-fatal warnings (non-converged optimizer
/// runs outside strict mode) are returned alongside the rows.
pub fn run_config<E: TrialExecutor>(cfg: &ValidatedConfig, exec: &E) -> Result<(Vec<SweepRow>, Vec<String>), CliError> {
    let mut notes = Vec::new();
    let name = cfg.experiment.as_str();
    let mut rows = vec![
        SweepRow::meta(name, "m", &cfg.m.to_string(), false, cfg.trials, cfg.seed),
        SweepRow::meta(name, "strict", &cfg.strict.to_string(), false, cfg.trials, cfg.seed),
    ];
    for (label, model) in &cfg.models {
        let prefix = |s: &str| match label {
            Some(l) => format!("{l}-{s}"),
            None => s.to_string(),
        };
        for &db in &cfg.snr_grid_db {
            let rho = db_to_linear(db);
            let row = |scheme: &str, metric: &str, e: MCEstimate| SweepRow::value(name, db, &prefix(scheme), metric, e.mean, e.stderr, e.trials, cfg.seed);
            let bench = match &cfg.benchmark {
                Some(b) => Some((b.label(), resolve_at(b, model, cfg.m, rho, cfg.seed, cfg.strict, &mut notes)?)),
                None => None,
            };
            for rs in &cfg.schemes {
                let scheme = resolve_at(rs, model, cfg.m, rho, cfg.seed, cfg.strict, &mut notes)?;
                let r = estimate_scheme(model, &scheme, cfg.m, rho, cfg.constellation, cfg.trials, cfg.seed, exec)?;
                let what = |m: &str| format!("{m} of {} at {db} dB", rs.label());
                rows.push(row(rs.label(), "mutual_info", finite(r.mutual_info, &what("mutual_info"), cfg.strict)?));
                rows.push(row(rs.label(), "p_avg", finite(r.p_avg, &what("p_avg"), cfg.strict)?));
                rows.push(row(rs.label(), "p_any", finite(r.p_any, &what("p_any"), cfg.strict)?));
                rows.push(row(rs.label(), "mse", finite(r.mse, &what("mse"), cfg.strict)?));
                if let Some((bl, b)) = &bench {
                    if *b == scheme {
                        continue;
                    }
                    let spec = DeltaSpec {
                        m: cfg.m,
                        rho,
                        benchmark: b.clone(),
                        test: scheme.clone(),
                        constellation: cfg.constellation,
                        trials: cfg.trials,
                        seed: cfg.seed,
                    };
                    let d = estimate_delta(model, &spec, exec)?;
                    for (metric, e) in [("delta_i", d.delta_i), ("delta_i_tilde", d.delta_i_tilde), ("delta_p", d.delta_p), ("delta_p_any", d.delta_p_any), ("delta_mse", d.delta_mse)] {
                        rows.push(row(rs.label(), &format!("{metric}_vs_{bl}"), finite(e, &what(metric), cfg.strict)?));
                    }
                }
            }
        }
    }
    Ok((rows, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrmimo_core::exec::Sequential;

    #[test]
    fn grid_and_parse() {
        let g = default_snr_grid();
        assert_eq!((g.len(), g[0], g[20]), (21, -10.0, 30.0));
        assert_eq!("fig4b".parse::<Figure>().unwrap(), Figure::Fig4b);
        assert!(matches!("fig9".parse::<Figure>(), Err(CliError::Config(_))));
    }

    #[test]
    fn fig4_threshold_and_profile() {
        let m = fig4b_model();
        assert_eq!(m.lambda_t().len(), 4);
        assert!((m.lambda_t().iter().sum::<f64>() - m.rho_c()).abs() < 1e-12);
        let t = stat_threshold_snr(&fig4a_model().lambda_t(), 2, 2.0).unwrap();
        assert!((t - 4.0 / 5.66).abs() < 1e-12);
    }

    #[test]
    fn fig3_small_run_has_rows() {
        let rows = reproduce(Figure::Fig3, &ReproduceOptions { trials: Some(20), seed: Some(3), family: None }, &Sequential).unwrap();
        let values: Vec<_> = rows.iter().filter(|r| r.scheme != "meta").collect();
        assert_eq!(values.len(), 2 * FIG3_RECEIVE.len());
        assert!(rows.iter().any(|r| r.metric == "snr_db=10 (default)"));
    }
}
