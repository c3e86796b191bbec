//! Sweep rows and their fixed CSV layout.

use std::io::Write;

pub const HEADER: &str = "experiment,snr_db,scheme,metric,mean,stderr,trials,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub experiment: String,
    /// Empty for rows not tied to an SNR point (metadata).
    pub snr_db: Option<f64>,
    pub scheme: String,
    pub metric: String,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl SweepRow {
    #[allow(clippy::too_many_arguments)]
    pub fn value(experiment: &str, snr_db: f64, scheme: &str, metric: &str, mean: f64, stderr: f64, trials: usize, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            snr_db: Some(snr_db),
            scheme: scheme.into(),
            metric: metric.into(),
            mean: Some(mean),
            stderr: Some(stderr),
            trials,
            seed,
        }
    }

    /// A `scheme = meta` row recording a setting; `default` marks values we
    /// chose because the source leaves them open.
    pub fn meta(experiment: &str, key: &str, value: &str, default: bool, trials: usize, seed: u64) -> Self {
        let tag = if default { " (default)" } else { "" };
        Self {
            experiment: experiment.into(),
            snr_db: None,
            scheme: "meta".into(),
            metric: format!("{key}={value}{tag}"),
            mean: None,
            stderr: None,
            trials,
            seed,
        }
    }

    pub fn to_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.experiment,
            opt(self.snr_db),
            self.scheme,
            self.metric,
            opt(self.mean),
            opt(self.stderr),
            self.trials,
            self.seed
        )
    }
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-5, 1e9)`. Never locale dependent.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}{:02}", trim_zeros(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_rows<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_line())?;
    }
    out.flush()
}
