//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when `validate` finds a failing check, 2 on
//! usage errors, missing files and any other error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{load_vol, read_json, ModelConfig};
use crate::curve::PriceForwardCurve;
use crate::error::{argument, Error, Result};
use crate::noise::{NoiseFactors, VolatilityStructure};
use crate::options::{mc_price_oracle, option_price, OptionKind, OptionSpec};
use crate::pricing::{
    auction_time, day_ahead_spot, delivery_hour, discounted_futures, futures_path, id_index, DiscountCurve,
    IdWindow, MarketState, Settlement,
};
use crate::quadrature::QuadratureSpec;
use crate::rng::path_rng;
use crate::sim::{simulate_ensemble, SimulationConfig};
use crate::structural::{ConstantModel, PfcWrapped, StructuralModel, WrapMode};
use crate::validate::{format_table, run_suite, ValidationSettings};

#[derive(Debug, Parser)]
#[command(name = "powerhjm", version, about = "Forward-kernel pricing and simulation for electricity")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// PFC CSV (`delivery_start_hours,price_eur_mwh[,end_hours]`).
    #[arg(long, global = true)]
    pub pfc: Option<PathBuf>,
    /// End of the last PFC segment when the CSV has no `end_hours` column.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Model JSON. Without it the kernel is the PFC itself.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Market noise JSON. Without it the noise is switched off.
    #[arg(long, global = true)]
    pub vol: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub paths: usize,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; all results are independent of this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Gauss-Legendre nodes per delivery segment (default 16).
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Longest delivery segment integrated by one rule, in hours (default 24).
    #[arg(long, global = true)]
    pub max_segment_hours: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect the price forward curve.
    Pfc {
        #[command(subcommand)]
        action: PfcCommand,
    },
    /// Simulate an ensemble of forward curves.
    Simulate(SimulateArgs),
    /// Price a product.
    Price {
        #[command(subcommand)]
        product: PriceCommand,
    },
    /// Run the validation suite and print a pass/fail table.
    Validate,
}

#[derive(Debug, Subcommand)]
pub enum PfcCommand {
    /// Summary statistics, or the curve itself with `--format csv`.
    Inspect,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated trading times in hours.
    #[arg(long, value_delimiter = ',', required = true)]
    pub trading_grid: Vec<f64>,
    /// Comma-separated delivery times in hours.
    #[arg(long, value_delimiter = ',', required = true)]
    pub delivery_grid: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Trading time in hours.
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Structural state at `t`, comma-separated. Required when `t > 0`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    /// Short-memory noise factor at `t`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub short: f64,
    /// Long-memory noise factor at `t`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub long: f64,
}

#[derive(Debug, Subcommand)]
pub enum PriceCommand {
    /// Futures with delivery over `[tau1, tau2]`.
    Futures {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        /// Discount curve JSON.
        #[arg(long)]
        discount: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SettlementArg::Continuous)]
        settlement: SettlementArg,
    },
    /// Day-ahead hourly price.
    Spot {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, allow_hyphen_values = true)]
        day: i64,
        #[arg(long)]
        hour: u32,
        /// Auction hour on the previous day; sets the trading time when `--t` is 0.
        #[arg(long)]
        auction_hour: Option<u32>,
    },
    /// Intraday ID_n index over `[tau1, tau2]`.
    IdIndex {
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        /// Lead window in hours, 1 or 3.
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// CSV of `t,f` futures samples. Without it one path is simulated.
        #[arg(long)]
        path: Option<PathBuf>,
        /// Trading-time step of the simulated path, in hours.
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
    /// European option on the futures over `[tau1, tau2]`, valued at t = 0.
    Option {
        #[arg(long = "T")]
        maturity: f64,
        #[arg(long = "K")]
        strike: f64,
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        #[arg(long, value_enum, default_value_t = KindArg::Call)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Lognormal)]
        method: MethodArg,
        /// Time steps of the full Monte Carlo grid up to `T`.
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettlementArg {
    Continuous,
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Conditional lognormal price averaged over `Y_T`.
    Lognormal,
    /// Full-path Monte Carlo.
    Mc,
}

/// Inputs resolved from the global flags.
pub struct Context {
    pub pfc: Option<Arc<PriceForwardCurve>>,
    pub model: Arc<dyn StructuralModel>,
    pub vol: VolatilityStructure,
    pub quad: QuadratureSpec,
}

impl Context {
    pub fn load(g: &GlobalArgs) -> Result<Self> {
        let pfc = match &g.pfc {
            Some(p) => Some(Arc::new(PriceForwardCurve::from_csv_path(p, g.horizon)?)),
            None => None,
        };
        let config = match &g.model {
            Some(p) => Some(ModelConfig::from_path(p)?),
            None => None,
        };
        let model: Arc<dyn StructuralModel> = match (&config, &pfc) {
            (Some(c), _) => c.build(pfc.as_ref())?,
            (None, Some(pfc)) => {
                Arc::new(PfcWrapped::new(Arc::new(ConstantModel::new(1.0)?), pfc.clone(), WrapMode::Geometric)?)
            }
            (None, None) => return Err(argument("need --model or --pfc")),
        };
        let vol = match &g.vol {
            Some(p) => load_vol(p)?,
            None => VolatilityStructure::zero(),
        };
        let mut quad = config.as_ref().and_then(|c| c.quad.clone()).unwrap_or_default();
        if let Some(n) = g.nodes {
            quad.nodes_per_segment = n;
        }
        if let Some(h) = g.max_segment_hours {
            quad.max_segment_hours = h;
        }
        quad.validate()?;
        Ok(Self { pfc, model, vol, quad })
    }

    fn state(&self, s: &StateArgs) -> Result<MarketState> {
        match &s.y {
            Some(y) => {
                let y = self.model.lift_state(y, s.t)?;
                MarketState::new(s.t, y, NoiseFactors { t: s.t, short: s.short, long: s.long })
            }
            None if s.t == 0.0 => Ok(MarketState::initial(self.model.as_ref())),
            None => Err(argument("--y is required when --t > 0")),
        }
    }
}

#[derive(Serialize)]
struct PriceOutput<'a> {
    product: &'a str,
    price: f64,
}

/// What a command produced.
enum Outcome {
    Done,
    ValidationFailed,
}

fn sink<'a>(out: &Option<PathBuf>, stdout: &'a mut (dyn Write + Send)) -> Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| Error::File { path: p.display().to_string(), source })?,
        )),
        None => Box::new(stdout),
    })
}

fn emit_price(product: &str, price: f64, format: Format, w: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string(&PriceOutput { product, price })?)?,
        Format::Csv => writeln!(w, "product,price\n{product},{price}")?,
    }
    Ok(())
}

fn read_path_csv(path: &PathBuf) -> Result<Vec<(f64, f64)>> {
    let file = File::open(path).map_err(|source| Error::File { path: path.display().to_string(), source })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut samples = Vec::new();
    for (i, record) in reader.deserialize::<(f64, f64)>().enumerate() {
        samples.push(record.map_err(|e| Error::Row { row: i + 1, message: e.to_string() })?);
    }
    Ok(samples)
}

fn execute(cli: &Cli, stdout: &mut (dyn Write + Send)) -> Result<Outcome> {
    let g = &cli.global;
    let ctx = Context::load(g)?;
    let model = ctx.model.as_ref();
    let vol = &ctx.vol;
    let mut w = sink(&g.out, stdout)?;
    match &cli.command {
        Command::Pfc { action: PfcCommand::Inspect } => {
            let pfc = ctx.pfc.as_ref().ok_or_else(|| argument("pfc inspect needs --pfc"))?;
            match g.format {
                Format::Csv => pfc.write_csv(&mut w)?,
                Format::Json => {
                    let (lo, hi) = pfc.range_on(pfc.start(), pfc.horizon())?;
                    let summary = serde_json::json!({
                        "start": pfc.start(),
                        "horizon": pfc.horizon(),
                        "segments": pfc.segment_count(),
                        "min": lo,
                        "max": hi,
                        "average": pfc.average(pfc.start(), pfc.horizon())?,
                    });
                    writeln!(w, "{}", serde_json::to_string_pretty(&summary)?)?;
                }
            }
        }
        Command::Simulate(args) => {
            let config = SimulationConfig {
                trading_grid: args.trading_grid.clone(),
                delivery_grid: args.delivery_grid.clone(),
                n_paths: g.paths,
                seed: g.seed,
                quad: ctx.quad.clone(),
            };
            let ensemble = simulate_ensemble(&config, model, vol)?;
            match g.format {
                Format::Csv => ensemble.write_csv(model, vol, &mut w)?,
                Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&ensemble.summary(model, vol)?)?)?,
            }
        }
        Command::Price { product } => match product {
            PriceCommand::Futures { state, tau1, tau2, discount, settlement } => {
                let disc: DiscountCurve = match discount {
                    Some(p) => read_json(p)?,
                    None => DiscountCurve::default(),
                };
                let settlement = match settlement {
                    SettlementArg::Continuous => Settlement::Continuous,
                    SettlementArg::Terminal => Settlement::Terminal,
                };
                let s = ctx.state(state)?;
                let price = discounted_futures(&s, model, vol, *tau1, *tau2, &disc, settlement, &ctx.quad)?;
                emit_price("futures", price, g.format, &mut w)?;
            }
            PriceCommand::Spot { state, day, hour, auction_hour } => {
                let s = ctx.state(state)?;
                if let Some(a) = auction_hour {
                    let ta = auction_time(*day, *a);
                    if s.t != ta {
                        return Err(argument(format!("state at t = {} but the auction is at t = {ta}", s.t)));
                    }
                }
                if s.t > delivery_hour(*day, *hour) {
                    return Err(argument("trading time after the delivery hour"));
                }
                let price = day_ahead_spot(&s, model, vol, *day, *hour, &ctx.quad)?;
                emit_price("spot", price, g.format, &mut w)?;
            }
            PriceCommand::IdIndex { tau1, tau2, n, path, step } => {
                let window = IdWindow::try_from(*n)?;
                let samples = match path {
                    Some(p) => read_path_csv(p)?,
                    None => simulated_futures_path(&ctx, window, *tau1, *tau2, *step, g.seed)?,
                };
                let index = id_index(&samples, window, *tau1, *tau2)?;
                emit_price("id_index", index, g.format, &mut w)?;
            }
            PriceCommand::Option { maturity, strike, tau1, tau2, kind, method, steps } => {
                let kind = match kind {
                    KindArg::Call => OptionKind::Call,
                    KindArg::Put => OptionKind::Put,
                };
                let spec = OptionSpec::new(*maturity, *strike, *tau1, *tau2, kind)?;
                let result = match method {
                    MethodArg::Lognormal => option_price(model, vol, &spec, g.paths, g.seed, &ctx.quad)?,
                    MethodArg::Mc => {
                        if *steps == 0 {
                            return Err(argument("--steps must be >= 1"));
                        }
                        let grid: Vec<f64> = (1..=*steps).map(|i| maturity * i as f64 / *steps as f64).collect();
                        mc_price_oracle(model, vol, &spec, g.paths, g.seed, &grid, &ctx.quad)?
                    }
                };
                match g.format {
                    Format::Json => writeln!(w, "{}", serde_json::to_string(&result)?)?,
                    Format::Csv => writeln!(w, "price,se,method\n{},{},{}", result.price, result.se, result.method)?,
                }
            }
        },
        Command::Validate => {
            let domain = match &ctx.pfc {
                Some(p) => (p.start().max(0.0), p.horizon()),
                None => (0.0, 24.0 * 30.0),
            };
            if !(domain.1 - domain.0 >= 2.0) {
                return Err(argument("validation needs a delivery domain of at least 2 hours"));
            }
            let settings = ValidationSettings { paths: g.paths, seed: g.seed, quad: ctx.quad.clone(), domain };
            let outcomes = run_suite(model, vol, &settings);
            match g.format {
                Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&outcomes)?)?,
                Format::Csv => write!(w, "{}", format_table(&outcomes))?,
            }
            w.flush()?;
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(Outcome::ValidationFailed);
            }
        }
    }
    w.flush()?;
    Ok(Outcome::Done)
}

/// One simulated path of `F_u(τ₁, τ₂)` sampled every `step` hours over the
/// `ID_n` window.
fn simulated_futures_path(
    ctx: &Context,
    window: IdWindow,
    tau1: f64,
    tau2: f64,
    step: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window.window(tau1);
    if lo < 0.0 {
        return Err(argument(format!("ID window starts at {lo}, before t = 0")));
    }
    if !(step > 0.0) {
        return Err(argument("--step must be > 0"));
    }
    let count = ((hi - lo) / step).ceil() as usize;
    let mut times: Vec<f64> = (0..count).map(|i| lo + i as f64 * step).collect();
    times.push(hi);
    let model = ctx.model.as_ref();
    let mut rng = path_rng(seed, 0);
    let mut states = Vec::with_capacity(times.len());
    let (mut t, mut y, mut noise) = (0.0, model.initial_state(), NoiseFactors::initial());
    for &next in &times {
        if next > t {
            y = model.simulate_transition(&y, t, next, &mut rng)?;
            noise = noise.advance(&ctx.vol, next, &mut rng);
            t = next;
        }
        states.push(MarketState { t, y: y.clone(), noise });
    }
    futures_path(&states, model, &ctx.vol, tau1, tau2, &ctx.quad)
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `stdout` and diagnostics to standard error.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.global.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, stdout)),
            Err(e) => Err(argument(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli, stdout),
    };
    match result {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::ValidationFailed) => 1,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            2
        }
    }
}
