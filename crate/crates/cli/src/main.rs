use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geosteer::channel::{end_to_end, WavePacket, BANDWIDTH_UNIT_HZ, PEAK_UNIT_HZ};
use geosteer::diagnostics::{compare_printed, magnitude_report};
use geosteer::emit::{emit, plot_script, Format};
use geosteer::spacetime::{
    delta_exact, delta_perturbative, DeltaMode, EarthModel, OrbitDirection, OrbitGeometry,
};
use geosteer::sweep::{figure_preset, run_sweep, Axis, FigureId, FixedParams, SweepSpec};
use geosteer::Error;

/// Environment variable naming a default constants file.
const CONSTANTS_ENV: &str = "GEOSTEER_CONSTANTS";

#[derive(Parser)]
#[command(name = "geosteer", version, about = "Gaussian EPR steering between a ground station and a satellite")]
struct Cli {
    /// TOML file overriding Earth constants (r_a_m, r_s_m, omega_rad_s, kerr_a_m, c_m_s).
    #[arg(long, global = true, env = CONSTANTS_ENV)]
    constants: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frequency-shift parameter δ at a satellite height.
    Delta {
        /// Height above the surface in km.
        height_km: f64,
        #[command(flatten)]
        orbit: OrbitArgs,
    },
    /// Steering at a single parameter point.
    Steer(SteerArgs),
    /// Table reproducing one of the figures (fig1, fig2, fig3a, fig3b, fig4).
    Figure {
        id: String,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
    },
    /// General sweep over one or two axes.
    Sweep(SweepArgs),
    /// Cross-checks of quoted magnitudes and formulas.
    Diagnostics {
        #[command(flatten)]
        packet: PacketArgs,
        /// Squeezing for the formula comparison.
        #[arg(long, default_value_t = 1.0)]
        squeezing: f64,
        /// Overlap for the formula comparison.
        #[arg(long, default_value_t = 0.9)]
        theta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Perturbative,
}

impl From<ModeArg> for DeltaMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => DeltaMode::Exact,
            ModeArg::Perturbative => DeltaMode::Perturbative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Ab,
    Ba,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

fn parse_epsilon(s: &str) -> Result<OrbitDirection, String> {
    match s {
        "1" | "+1" => Ok(OrbitDirection::CoRotating),
        "-1" => Ok(OrbitDirection::CounterRotating),
        _ => Err(format!("expected +1 or -1, got `{s}`")),
    }
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// +1 co-rotating, -1 counter-rotating orbit.
    #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_epsilon)]
    epsilon: OrbitDirection,
}

#[derive(Args)]
struct PacketArgs {
    /// Peak frequency in units of 500 THz.
    #[arg(long, default_value_t = 1.0, conflicts_with = "peak_hz")]
    omega2: f64,
    /// Bandwidth in units of 1 MHz.
    #[arg(long, default_value_t = 1.0, conflicts_with = "bandwidth_hz")]
    sigma: f64,
    /// Peak frequency in Hz.
    #[arg(long)]
    peak_hz: Option<f64>,
    /// Bandwidth in Hz.
    #[arg(long)]
    bandwidth_hz: Option<f64>,
}

impl PacketArgs {
    fn omega2(&self) -> f64 {
        self.peak_hz.map_or(self.omega2, |hz| hz / PEAK_UNIT_HZ)
    }

    fn sigma(&self) -> f64 {
        self.bandwidth_hz.map_or(self.sigma, |hz| hz / BANDWIDTH_UNIT_HZ)
    }

    fn packet(&self) -> Result<WavePacket, Error> {
        WavePacket::new(
            self.peak_hz.unwrap_or(self.omega2 * PEAK_UNIT_HZ),
            self.bandwidth_hz.unwrap_or(self.sigma * BANDWIDTH_UNIT_HZ),
        )
    }
}

#[derive(Args)]
struct SteerArgs {
    #[arg(long)]
    height_km: f64,
    #[arg(long)]
    squeezing: f64,
    #[command(flatten)]
    packet: PacketArgs,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    direction: DirectionArg,
    #[command(flatten)]
    orbit: OrbitArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Also write a matplotlib script plotting the table (needs --out).
    #[arg(long, requires = "out")]
    plot_script: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Axis as name=lo:hi:steps with name in h, s, sigma, omega2 (h in km).
    #[arg(long = "var", required = true)]
    vars: Vec<String>,
    #[arg(long, default_value_t = 20_000.0)]
    height_km: f64,
    #[arg(long, default_value_t = 1.0)]
    squeezing: f64,
    #[command(flatten)]
    packet: PacketArgs,
    #[command(flatten)]
    orbit: OrbitArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn num(v: f64) -> String {
    geosteer::emit::format_number(v)
}

fn load_earth(path: Option<&Path>) -> Result<EarthModel, Error> {
    match path {
        Some(p) => EarthModel::from_constants_file(p),
        None => Ok(EarthModel::default()),
    }
}

fn cmd_delta(
    earth: EarthModel,
    height_km: f64,
    orbit: &OrbitArgs,
    out: &mut impl Write,
) -> Result<(), Error> {
    let geom = OrbitGeometry::new(earth, height_km * 1e3, orbit.epsilon)?;
    match DeltaMode::from(orbit.mode) {
        DeltaMode::Exact => writeln!(out, "delta = {}", num(delta_exact(&geom)?))?,
        DeltaMode::Perturbative => {
            let p = delta_perturbative(&geom)?;
            writeln!(out, "delta = {}", num(p.total))?;
            writeln!(out, "delta_sch = {}", num(p.schwarzschild))?;
            writeln!(out, "delta_rot = {}", num(p.rotation))?;
            writeln!(out, "delta_h = {}", num(p.higher))?;
            if p.higher_undefined {
                eprintln!("note: omega = 0, higher-order term set to 0");
            }
        }
    }
    Ok(())
}

fn cmd_steer(earth: EarthModel, args: &SteerArgs, out: &mut impl Write) -> Result<(), Error> {
    let geom = OrbitGeometry::new(earth, args.height_km * 1e3, args.orbit.epsilon)?;
    let r = end_to_end(&geom, &args.packet.packet()?, args.squeezing, args.orbit.mode.into())?;
    writeln!(out, "delta = {}", num(r.delta))?;
    writeln!(out, "theta = {}", num(r.channel.theta))?;
    if matches!(args.direction, DirectionArg::Ab | DirectionArg::Both) {
        writeln!(out, "g_ab = {}", num(r.steering.g_ab))?;
    }
    if matches!(args.direction, DirectionArg::Ba | DirectionArg::Both) {
        writeln!(out, "g_ba = {}", num(r.steering.g_ba))?;
    }
    if matches!(args.direction, DirectionArg::Both) {
        writeln!(out, "g_asym = {}", num(r.steering.asymmetry))?;
    }
    Ok(())
}

fn write_table(spec: &SweepSpec, output: &OutputArgs, title: &str) -> Result<(), Error> {
    let rows = run_sweep(spec)?;
    let format = match output.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Jsonl => Format::Jsonl,
    };
    match &output.out {
        Some(path) => emit(&rows, format, &mut BufWriter::new(File::create(path)?))?,
        None => emit(&rows, format, &mut io::stdout().lock())?,
    }
    if let (Some(script), Some(out)) = (&output.plot_script, &output.out) {
        let csv_ref = relative_to_script(script, out)?;
        std::fs::write(script, plot_script(spec, &csv_ref, title))?;
    }
    Ok(())
}

/// Path of `table` as seen from the directory holding `script`.
fn relative_to_script(script: &Path, table: &Path) -> io::Result<String> {
    let dir = |p: &Path| -> io::Result<PathBuf> {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
        std::fs::canonicalize(parent.unwrap_or(Path::new(".")))
    };
    let (script_dir, table_dir) = (dir(script)?, dir(table)?);
    let name = table.file_name().unwrap_or_default();
    let path = match table_dir.strip_prefix(&script_dir) {
        Ok(rel) => rel.join(name),
        Err(_) => table_dir.join(name),
    };
    Ok(path.to_string_lossy().into_owned())
}

fn cmd_sweep(earth: EarthModel, args: &SweepArgs) -> Result<(), Error> {
    let axes = args
        .vars
        .iter()
        .map(|v| v.parse::<Axis>())
        .collect::<Result<Vec<_>, _>>()?;
    let fixed = FixedParams {
        h_km: args.height_km,
        s: args.squeezing,
        sigma: args.packet.sigma(),
        omega2: args.packet.omega2(),
    };
    let spec = SweepSpec {
        delta_mode: args.orbit.mode.into(),
        direction: args.orbit.epsilon,
        earth,
        ..SweepSpec::new(axes, fixed)
    };
    write_table(&spec, &args.output, "sweep")
}

fn run(cli: Cli) -> Result<(), Error> {
    let earth = load_earth(cli.constants.as_deref())?;
    let stdout = io::stdout();
    match cli.command {
        Command::Delta { height_km, orbit } => cmd_delta(earth, height_km, &orbit, &mut stdout.lock()),
        Command::Steer(args) => cmd_steer(earth, &args, &mut stdout.lock()),
        Command::Figure { id, output, mode } => {
            let id: FigureId = id.parse()?;
            let spec = SweepSpec {
                earth,
                delta_mode: mode.into(),
                ..figure_preset(id)
            };
            write_table(&spec, &output, id.name())
        }
        Command::Sweep(args) => cmd_sweep(earth, &args),
        Command::Diagnostics {
            packet,
            squeezing,
            theta,
        } => {
            let mut out = stdout.lock();
            writeln!(out, "{}", magnitude_report(&earth, &packet.packet()?)?)?;
            writeln!(out)?;
            write!(out, "{}", compare_printed(squeezing, theta)?)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}
