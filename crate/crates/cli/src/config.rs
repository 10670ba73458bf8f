//! Flag parsing and resolution of defaults into a complete run config.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use swapsim::records::RecordFormat;
use swapsim::{BellOutcome, ChshSettings, Direction, StationDAction};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;
/// Polar angles (degrees, x–z plane) of `a, a′, b, b′`.
pub const DEFAULT_SETTINGS: &str = "0,90,45,135";

#[derive(Debug, Parser)]
#[command(
    name = "swapsim",
    version,
    about = "Entanglement-swapping simulator and CHSH harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Check the exact state identities and print residuals
    Verify,
    /// Run the swapping experiment, post-select and estimate CHSH
    Swap,
    /// Exact CHSH values of the Bell-conditioned pairs and of I/4
    Chsh,
    /// Compare C's unconditioned statistics across D actions
    Marginals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl From<Format> for RecordFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => RecordFormat::Json,
            Format::Csv => RecordFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Number of trials
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,

    /// Master seed
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Station D action: bell, zz or none
    #[arg(long = "d-action", global = true, value_parser = parse_action)]
    pub d_action: Option<StationDAction>,

    /// Bell outcome to post-select on: psi+, psi-, phi+, phi-
    #[arg(long, global = true, value_parser = parse_bell)]
    pub select: Option<BellOutcome>,

    /// Angles of a,a',b,b' in degrees; each is a polar angle in the x-z plane
    /// or `polar:azimuth`
    #[arg(long, global = true, default_value = DEFAULT_SETTINGS)]
    pub settings: String,

    /// Record file for `swap`
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Record file format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the JSON report here
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Keep station D's results local (no classical broadcast)
    #[arg(long = "no-broadcast", global = true)]
    pub no_broadcast: bool,

    /// Fault injection for `verify`: perturb this amplitude of the checked state
    #[arg(long = "corrupt-amplitude", global = true, hide = true)]
    pub corrupt_amplitude: Option<usize>,
}

fn parse_action(s: &str) -> Result<StationDAction, String> {
    s.parse()
}

fn parse_bell(s: &str) -> Result<BellOutcome, String> {
    s.parse()
}

/// One measurement direction as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleDegrees {
    pub polar: f64,
    pub azimuth: f64,
}

impl AngleDegrees {
    pub fn direction(self) -> Direction {
        Direction::from_angles(self.polar * PI / 180.0, self.azimuth * PI / 180.0)
    }
}

/// Parses `a,a',b,b'`, each entry `polar` or `polar:azimuth` in degrees.
pub fn parse_settings(s: &str) -> Result<[AngleDegrees; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!(
            "--settings needs four angles a,a',b,b', got {}",
            parts.len()
        ));
    }
    let number = |t: &str| -> Result<f64, String> {
        let v: f64 = t.parse().map_err(|_| format!("malformed angle `{t}`"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("malformed angle `{t}`"))
        }
    };
    let mut out = [AngleDegrees {
        polar: 0.0,
        azimuth: 0.0,
    }; 4];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = match part.split_once(':') {
            Some((p, a)) => AngleDegrees {
                polar: number(p)?,
                azimuth: number(a)?,
            },
            None => AngleDegrees {
                polar: number(part)?,
                azimuth: 0.0,
            },
        };
    }
    Ok(out)
}

/// Every value a command runs with, defaults filled in. Echoed in reports.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub command: Command,
    pub trials: u64,
    pub seed: u64,
    pub d_actions: Vec<StationDAction>,
    pub select: Option<BellOutcome>,
    pub broadcast: bool,
    pub settings_degrees: [AngleDegrees; 4],
    pub settings: ChshSettings,
    pub out: Option<PathBuf>,
    pub format: RecordFormat,
    pub corrupt_amplitude: Option<usize>,
}

impl ResolvedConfig {
    pub fn d_action(&self) -> StationDAction {
        self.d_actions[0]
    }
}

/// Resolves defaults and rejects inconsistent flags before anything runs.
pub fn resolve(cli: &Cli) -> Result<ResolvedConfig, String> {
    let o = &cli.opts;
    let settings_degrees = parse_settings(&o.settings)?;
    let settings = ChshSettings {
        a: settings_degrees[0].direction(),
        a_prime: settings_degrees[1].direction(),
        b: settings_degrees[2].direction(),
        b_prime: settings_degrees[3].direction(),
    };
    let broadcast = !o.no_broadcast;

    let d_actions = match (cli.command, o.d_action) {
        (Command::Marginals, None) => StationDAction::ALL.to_vec(),
        (_, Some(a)) => vec![a],
        (_, None) => vec![StationDAction::BellMeasurement],
    };

    let select = match cli.command {
        Command::Swap => {
            let bell_with_broadcast = d_actions[0] == StationDAction::BellMeasurement && broadcast;
            match o.select {
                Some(_) if !bell_with_broadcast => {
                    return Err("--select needs --d-action bell with the broadcast enabled".into());
                }
                Some(b) => Some(b),
                None if bell_with_broadcast => Some(BellOutcome::PsiMinus),
                None => None,
            }
        }
        _ => o.select,
    };

    match cli.command {
        Command::Swap if o.trials == 0 => return Err("--trials must be positive".into()),
        Command::Marginals if o.trials < 10_000 => {
            return Err(format!(
                "marginals needs --trials >= 10000, got {}",
                o.trials
            ));
        }
        _ => {}
    }

    Ok(ResolvedConfig {
        command: cli.command,
        trials: o.trials,
        seed: o.seed,
        d_actions,
        select,
        broadcast,
        settings_degrees,
        settings,
        out: o.out.clone(),
        format: o.format.into(),
        corrupt_amplitude: o.corrupt_amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("swapsim").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn settings_parse() {
        let s = parse_settings("0, 90,45:10,135").unwrap();
        assert_eq!(
            s[2],
            AngleDegrees {
                polar: 45.0,
                azimuth: 10.0
            }
        );
        assert!(parse_settings("0,90,45").is_err());
        assert!(parse_settings("0,90,x,1").is_err());
        assert!(parse_settings("0,90,inf,1").is_err());
    }

    #[test]
    fn defaults_materialize() {
        let r = resolve(&cli(&["swap"])).unwrap();
        assert_eq!(r.trials, DEFAULT_TRIALS);
        assert_eq!(r.seed, DEFAULT_SEED);
        assert_eq!(r.d_actions, vec![StationDAction::BellMeasurement]);
        assert_eq!(r.select, Some(BellOutcome::PsiMinus));
        assert_eq!(r.settings, ChshSettings::default());
        let m = resolve(&cli(&["marginals"])).unwrap();
        assert_eq!(m.d_actions.len(), 3);
    }

    #[test]
    fn inconsistent_flags_are_rejected() {
        assert!(resolve(&cli(&["swap", "--trials", "0"])).is_err());
        assert!(resolve(&cli(&["swap", "--d-action", "zz", "--select", "psi+"])).is_err());
        assert!(resolve(&cli(&["swap", "--no-broadcast", "--select", "psi+"])).is_err());
        assert!(resolve(&cli(&["marginals", "--trials", "500"])).is_err());
        assert!(resolve(&cli(&["chsh", "--settings", "1,2"])).is_err());
    }

    #[test]
    fn unknown_values_fail_parsing() {
        assert!(Cli::try_parse_from(["swapsim", "swap", "--d-action", "xy"]).is_err());
        assert!(Cli::try_parse_from(["swapsim", "swap", "--select", "psi"]).is_err());
        assert!(Cli::try_parse_from(["swapsim", "swap", "--format", "xml"]).is_err());
    }
}
