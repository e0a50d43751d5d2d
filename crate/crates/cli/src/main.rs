//! `uavrelay` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use uavrelay_core::opt2d::{maxmin_1d, maxmin_2d, min_capacity};
use uavrelay_core::opt3d::{capacity_slice, sweep_optimal_position, Axis, SweepParameter};
use uavrelay_core::scenario::unix_now;
use uavrelay_core::{
    average_capacity, load_scenario, mc_capacity, optimize_position, validation_cases, CapacityUnit, CouplingModel,
    FadingMode, RelayScheme, ResultRecord, Scenario, Table, UavPosition,
};

#[derive(Debug, Parser)]
#[command(
    name = "uavrelay",
    version,
    about = "Place a solar-powered UAV relay between a sensor field and an optical ground station"
)]
struct Cli {
    /// Scenario file (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Seed for Monte Carlo streams and optimizer start orientation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, global = true, value_enum)]
    fading: Option<FadingArg>,
    #[arg(long, global = true, value_enum)]
    unit: Option<UnitArg>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a JSON result record here.
    #[arg(long, global = true)]
    record: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimise the 3-D relay position and write a result record.
    Solve,
    /// Capacity along one axis through a fixed point, as CSV.
    Slice {
        #[arg(long, value_enum, default_value = "z")]
        axis: AxisArg,
        /// Fixed point `x,y,z`; the swept coordinate is ignored.
        #[arg(long, value_delimiter = ',', required = true)]
        at: Vec<f64>,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Re-optimise the position over a parameter range, as CSV.
    Sweep {
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Slope k in `β_c = k ψ_c`.
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
    },
    /// Max-min fair placement at a fixed altitude, as CSV of candidates.
    Maxmin {
        #[arg(long)]
        z: f64,
        #[arg(long, value_enum, default_value = "auto")]
        dim: DimArg,
    },
    /// Compare quadrature against Monte Carlo on the scenario and random variants.
    Validate {
        #[arg(long)]
        samples: Option<u64>,
        /// Random variants in addition to the scenario itself.
        #[arg(long, default_value_t = 5)]
        cases: usize,
    },
    /// Print the default scenario as TOML.
    Defaults,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Af,
    Df,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FadingArg {
    Pointing,
    Composite,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    #[value(name = "psi_c")]
    PsiC,
    Noise,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DimArg {
    Auto,
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_record("usage", &e.to_string());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<uavrelay_core::Error>().map_or("runtime", |e| e.kind());
            error_record(kind, &format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}

fn error_record(kind: &str, message: &str) {
    let record = serde_json::json!({ "error": { "kind": kind, "message": message.trim_end() } });
    eprintln!("{record}");
}

fn scenario(cli: &Cli) -> Result<Scenario> {
    let mut s = match &cli.scenario {
        Some(path) => load_scenario(path)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        s.mc.seed = seed;
        s.optimizer.seed = seed;
    }
    if let Some(scheme) = cli.scheme {
        s.relay.scheme = match scheme {
            SchemeArg::Af => RelayScheme::Af,
            SchemeArg::Df => RelayScheme::Df,
        };
    }
    if let Some(fading) = cli.fading {
        s.optical.fading = match fading {
            FadingArg::Pointing => FadingMode::Pointing,
            FadingArg::Composite => FadingMode::Composite,
        };
    }
    if let Some(unit) = cli.unit {
        s.relay.unit = match unit {
            UnitArg::Nats => CapacityUnit::Nats,
            UnitArg::Bits => CapacityUnit::Bits,
        };
    }
    s.validate()?;
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn linspace(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        bail!("need finite bounds and at least one step");
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn logspace(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > 0.0) {
        bail!("log-spaced sweep needs positive bounds, got {from} and {to}");
    }
    Ok(linspace(from.log10(), to.log10(), steps)?
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect())
}

fn run(cli: &Cli) -> Result<()> {
    let started = unix_now();
    if let Command::Defaults = cli.command {
        return emit(cli.out.as_deref(), &Scenario::default().to_toml()?);
    }
    let s = scenario(cli)?;
    let unit = s.relay.unit;
    let (name, table) = match &cli.command {
        Command::Defaults => unreachable!(),
        Command::Solve => {
            let r = optimize_position(&s)?;
            let mut t = Table::new(["x", "y", "z", "capacity", "min_altitude", "evals", "budget_exhausted"]);
            t.push(vec![
                r.position.x,
                r.position.y,
                r.position.z,
                unit.from_nats(r.capacity),
                r.min_altitude,
                r.evals as f64,
                f64::from(u8::from(r.budget_exhausted)),
            ]);
            eprintln!(
                "{:?} optimum at ({:.2}, {:.2}, {:.2}) m: {:.6} {} ({} evaluations{})",
                r.scheme,
                r.position.x,
                r.position.y,
                r.position.z,
                unit.from_nats(r.capacity),
                unit_label(unit),
                r.evals,
                if r.budget_exhausted {
                    ", local budget exhausted"
                } else {
                    ""
                }
            );
            let record = ResultRecord::new(&s, "solve", t.clone(), started);
            emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&record)? + "\n"))?;
            ("solve", t)
        }
        Command::Slice {
            axis,
            at,
            from,
            to,
            steps,
        } => {
            let (axis, label) = match axis {
                AxisArg::X => (Axis::X, "x"),
                AxisArg::Y => (Axis::Y, "y"),
                AxisArg::Z => (Axis::Z, "z"),
            };
            let &[mut x, mut y, mut z] = at.as_slice() else {
                bail!("--at takes three comma-separated coordinates, got {}", at.len());
            };
            let grid = linspace(*from, *to, *steps)?;
            match axis {
                Axis::X => x = grid[0],
                Axis::Y => y = grid[0],
                Axis::Z => z = grid[0],
            }
            let fixed = UavPosition::new(x, y, z)?;
            let rows = capacity_slice(&s, axis, &fixed, &grid)?;
            let mut t = Table::new([label, "capacity"]);
            for (c, v) in rows {
                t.push(vec![c, unit.from_nats(v)]);
            }
            emit(cli.out.as_deref(), &t.to_csv())?;
            ("slice", t)
        }
        Command::Sweep {
            param,
            from,
            to,
            steps,
            coupling,
        } => {
            let (parameter, values, label) = match param {
                ParamArg::PsiC => (SweepParameter::CloudExtinction, linspace(*from, *to, *steps)?, "psi_c"),
                ParamArg::Noise => (SweepParameter::OgsNoise, logspace(*from, *to, *steps)?, "noise"),
            };
            if values.windows(2).any(|w| w[1] < w[0]) {
                bail!("--from must not exceed --to");
            }
            let rows = sweep_optimal_position(&s, parameter, &values, CouplingModel::new(*coupling)?)?;
            let mut t = Table::new([label, "x", "y", "z", "capacity"]);
            for r in rows {
                t.push(vec![r.value, r.x, r.y, r.z, unit.from_nats(r.capacity)]);
            }
            emit(cli.out.as_deref(), &t.to_csv())?;
            ("sweep", t)
        }
        Command::Maxmin { z, dim } => {
            let field = &s.sensors;
            let on_line = field.y.iter().all(|&y| y == field.y[0]);
            let sol = match dim {
                DimArg::One => maxmin_1d(field, *z)?,
                DimArg::Two => maxmin_2d(field, *z)?,
                DimArg::Auto if on_line => maxmin_1d(field, *z)?,
                DimArg::Auto => maxmin_2d(field, *z)?,
            };
            let weakest = (0..field.len())
                .min_by(|&a, &b| field.power[a].total_cmp(&field.power[b]))
                .expect("validated field has sensors");
            let mut candidates = vec![(weakest, (field.x[weakest], field.y[weakest]))];
            candidates.extend(
                sol.intersections
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| p.map(|p| (i, p))),
            );
            let mut t = Table::new(["sensor", "x", "y", "min_capacity", "selected"]);
            for (i, (x, y)) in candidates {
                let selected = (x, y) == sol.position;
                t.push(vec![
                    i as f64,
                    x,
                    y,
                    unit.from_nats(min_capacity(field, x, y, *z)),
                    f64::from(u8::from(selected)),
                ]);
            }
            eprintln!(
                "max-min optimum at ({:.3}, {:.3}) m: {:.6} {} (binding sensor {})",
                sol.position.0,
                sol.position.1,
                unit.from_nats(sol.value),
                unit_label(unit),
                sol.binding_sensor
            );
            emit(cli.out.as_deref(), &t.to_csv())?;
            ("maxmin", t)
        }
        Command::Validate { samples, cases } => {
            let mut settings = s.mc;
            if let Some(n) = samples {
                settings.samples = *n;
            }
            settings.validate()?;
            let scheme = s.relay.scheme;
            let mut t = Table::new(["case", "x", "y", "z", "quadrature", "mc_mean", "std_error", "z_score"]);
            let mut worst: f64 = 0.0;
            for (i, (c, p)) in validation_cases(&s, *cases, settings.seed)?.iter().enumerate() {
                let quad = average_capacity(p, c)?.value;
                let mc = mc_capacity(c, p, scheme, &settings)?;
                let score = (quad - mc.mean).abs() / mc.std_error;
                worst = worst.max(score);
                t.push(vec![
                    i as f64,
                    p.x,
                    p.y,
                    p.z,
                    unit.from_nats(quad),
                    unit.from_nats(mc.mean),
                    unit.from_nats(mc.std_error),
                    score,
                ]);
            }
            emit(cli.out.as_deref(), &t.to_csv())?;
            write_record(cli, &s, "validate", &t, started)?;
            if worst >= 3.0 {
                bail!("quadrature and Monte Carlo disagree by {worst:.2} standard errors");
            }
            eprintln!("largest disagreement {worst:.2} standard errors");
            return Ok(());
        }
    };
    write_record(cli, &s, name, &table, started)
}

fn write_record(cli: &Cli, s: &Scenario, name: &str, table: &Table, started: u64) -> Result<()> {
    if let Some(path) = &cli.record {
        let record = ResultRecord::new(s, name, table.clone(), started);
        std::fs::write(path, serde_json::to_string_pretty(&record)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn unit_label(unit: CapacityUnit) -> &'static str {
    match unit {
        CapacityUnit::Nats => "nats/s/Hz",
        CapacityUnit::Bits => "bits/s/Hz",
    }
}
