mod args;
mod error;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::*;
use error::CliError;
use output::{document, emit, Cell, Format, RunConfig, Table};
use twowell::duality::{random_two_state_reports, transition_report};
use twowell::gibbs::{run_chain, scan_p, tilt_tail, Init, ScanProtocol};
use twowell::spinwave::{finite_free_energy, finite_free_energy_direct, infinite_free_energy, FreeEnergyMode};
use twowell::{ModelParams, PatternId};

type Res = Result<(), CliError>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let code = match dispatch(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("twowell: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn dispatch(argv: Vec<String>) -> Res {
    if let Ok(v) = std::env::var("TWOWELL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("TWOWELL_THREADS must be a positive integer, got '{v}'")))?;
        // Ignore the error if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let argv = expand_config(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let name = cli.command.name();
    match &cli.command {
        Command::Spinwave(a) => spinwave(name, a),
        Command::GapCheck(a) => gap_check(name, a),
        Command::FiniteFe(a) => finite_fe(name, a),
        Command::Logz(a) => logz(name, a),
        Command::Sample(a) => sample(name, a),
        Command::Scan(a) => scan(name, a),
        Command::DualityCheck(a) => duality_check(name, a),
        Command::Pt(a) => pt(name, a),
        Command::ExactEnum(a) => exact_enum(name, a),
        Command::TiltCheck(a) => tilt_check(name, a),
    }
}

fn patterns(spec: &str) -> Result<Vec<PatternId>, CliError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(PatternId::ALL.to_vec());
    }
    Ok(parse_list::<String>(spec, "pattern")?
        .iter()
        .map(|s| s.parse::<PatternId>())
        .collect::<Result<_, _>>()?)
}

fn params(p: f64, kappa_o: f64, kappa_d: Option<f64>) -> Result<ModelParams<f64>, CliError> {
    Ok(ModelParams::new(p, kappa_o, kappa_d.unwrap_or(1.0 / kappa_o))?)
}

fn out_path(c: &Common) -> Option<&Path> {
    c.out.as_deref()
}

fn emit_table(t: &Table, c: &Common, cfg: &RunConfig) -> Res {
    emit(&t.render(c.format.unwrap_or(Format::Csv), cfg), out_path(c))
}

fn emit_json(payload: Value, c: &Common, cfg: &RunConfig) -> Res {
    if c.format == Some(Format::Csv) {
        return Err(CliError::Usage("this subcommand only writes JSON".into()));
    }
    emit(&document(cfg, "result", payload), out_path(c))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

const FE_HEADER: &[&str] = &["pattern", "p", "kappa_O", "kappa_D", "L", "value", "error_estimate"];

fn spinwave(name: &str, a: &SpinwaveArgs) -> Res {
    let cfg = RunConfig::new(name, a);
    let pats = patterns(&a.pattern)?;
    let ps = parse_grid(&a.p)?;
    for &p in &ps {
        params(p, a.kappa_o, a.kappa_d)?;
    }
    a.quad.spec().validate()?;
    let mut t = Table::new(FE_HEADER);
    for &pat in &pats {
        for &p in &ps {
            let m = params(p, a.kappa_o, a.kappa_d)?;
            let r = match a.side {
                Some(l) => finite_free_energy(pat, &m, l)?,
                None => infinite_free_energy(pat, &m, &a.quad.spec())?,
            };
            let (l, err) = match r.mode {
                FreeEnergyMode::Finite { side } => (Cell::from(side), 0.0),
                FreeEnergyMode::Infinite { error, .. } => (Cell::from("inf"), error),
            };
            t.push(vec![pat.name().into(), p.into(), m.kappa_o.into(), m.kappa_d.into(), l, r.value.into(), err.into()]);
        }
    }
    emit_table(&t, &a.common, &cfg)
}

fn gap_check(name: &str, a: &GapCheckArgs) -> Res {
    use twowell::spinwave::{constants_i_j, SpinWaveIntegrals};
    let cfg = RunConfig::new(name, a);
    let ps = parse_grid(&a.p)?;
    let ratios = parse_grid(&a.ratios)?;
    let spec = a.quad.spec();
    spec.validate()?;
    let constants = constants_i_j::<f64>(&spec)?;
    let mut t = Table::new(&[
        "p", "kappa_O", "kappa_D", "lhs", "rhs", "margin", "tolerance", "holds", "minimizer", "reference",
    ]);
    for &ratio in &ratios {
        let m0 = ModelParams::dual_normalized(0.5, ratio)?;
        let sw = SpinWaveIntegrals::compute(m0.kappa_o, m0.kappa_d, &spec)?;
        for &p in &ps {
            let g = sw.gap_report(p, &constants)?;
            t.push(vec![
                p.into(),
                g.kappa_o.into(),
                g.kappa_d.into(),
                g.lhs.into(),
                g.rhs.into(),
                g.margin.into(),
                g.tolerance.into(),
                g.holds.into(),
                g.minimizer.name().into(),
                g.reference.name().into(),
            ]);
        }
    }
    emit_table(&t, &a.common, &cfg)
}

fn finite_fe(name: &str, a: &FiniteFeArgs) -> Res {
    let cfg = RunConfig::new(name, a);
    let pats = patterns(&a.pattern)?;
    let ps = parse_grid(&a.p)?;
    let sides: Vec<usize> = parse_list(&a.sides, "side")?;
    let mut t = Table::new(&["pattern", "p", "kappa_O", "kappa_D", "L", "value", "oracle", "abs_diff"]);
    for &pat in &pats {
        for &p in &ps {
            let m = params(p, a.kappa_o, a.kappa_d)?;
            for &l in &sides {
                let v = finite_free_energy(pat, &m, l)?.value;
                let o = finite_free_energy_direct(pat, &m, l)?;
                let diff = if v == o { 0.0 } else { (v - o).abs() };
                t.push(vec![
                    pat.name().into(),
                    p.into(),
                    m.kappa_o.into(),
                    m.kappa_d.into(),
                    l.into(),
                    v.into(),
                    o.into(),
                    diff.into(),
                ]);
            }
        }
    }
    emit_table(&t, &a.common, &cfg)
}

fn logz(name: &str, a: &LogzArgs) -> Res {
    use twowell::gaussfield::{log_partition, log_partition_star};
    use twowell::ConfigData;
    let cfg = RunConfig::new(name, a);
    let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
    let (g, data) = twowell::parse_config::<f64>(&text)?;
    let ConfigData::Kappa(kappa) = data else {
        return Err(CliError::Usage("logz needs a kappa configuration, got eta".into()));
    };
    let payload = json!({
        "logZ": log_partition(&kappa, &g)?,
        "logZstar": log_partition_star(&kappa, &g)?,
        "N": g.num_sites(),
        "L": g.side(),
    });
    emit_json(payload, &a.common, &cfg)
}

fn chain_params(p: f64, c: &ChainArgs) -> Result<ModelParams<f64>, CliError> {
    if c.sweeps == 0 {
        return Err(CliError::Usage("--sweeps must be positive".into()));
    }
    Ok(ModelParams::new(p, c.kappa_o, c.kappa_d)?)
}

fn sample(name: &str, a: &SampleArgs) -> Res {
    let cfg = RunConfig::new(name, a);
    let m = chain_params(a.p, &a.chain)?;
    let init: Init = a.init.parse()?;
    let recs = run_chain(m, a.chain.side, init, a.chain.burnin + a.chain.sweeps, a.chain.burnin, a.seed, a.stream)?;
    let mut t = Table::new(&["sweep", "r_ord", "tilt_x", "tilt_y", "mean_energy", "kappa_eta_sq", "n_ordered"]);
    for r in &recs {
        t.push(vec![
            r.sweep.into(),
            r.r_ord.into(),
            r.tilt[0].into(),
            r.tilt[1].into(),
            r.mean_energy.into(),
            r.kappa_eta_sq.into(),
            r.n_ordered.into(),
        ]);
    }
    emit_table(&t, &a.common, &cfg)
}

fn scan(name: &str, a: &ScanArgs) -> Res {
    let cfg = RunConfig::new(name, a);
    let grid = parse_grid(&a.p_grid)?;
    for &p in &grid {
        chain_params(p, &a.chain)?;
    }
    let seeds: Vec<u64> = parse_list(&a.seeds, "seed")?;
    let protocol = ScanProtocol { burn_in: a.chain.burnin, measure: a.chain.sweeps, seeds };
    let rep = scan_p(a.chain.kappa_o, a.chain.kappa_d, &grid, a.chain.side, &protocol)?;
    let mut t = Table::new(&["p", "init", "seed", "r_ord_mean", "r_ord_se"]);
    for q in &rep.points {
        t.push(vec![q.p.into(), q.init.name().into(), q.seed.into(), q.r_ord.mean.into(), q.r_ord.se.into()]);
    }
    emit_table(&t, &a.common, &cfg)?;
    let summary = document(
        &cfg,
        "summary",
        json!({
            "jump_estimate": rep.jump,
            "hysteresis_interval": rep.hysteresis,
            "grid": rep.grid,
            "chi": rep.chi,
            "chi_ordered": rep.chi_ordered,
            "chi_disordered": rep.chi_disordered,
        }),
    );
    match &a.summary {
        Some(path) => emit(&summary, Some(path)),
        None => {
            eprint!("{summary}");
            Ok(())
        }
    }
}

fn duality_check(name: &str, a: &DualityCheckArgs) -> Res {
    let cfg = RunConfig::new(name, a);
    let reports = random_two_state_reports(a.side, a.samples, a.seed, a.kappa_o, a.kappa_d)?;
    let max = reports.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    emit_json(json!({ "reports": to_value(&reports), "max_residual": max }), &a.common, &cfg)
}

fn pt(name: &str, a: &PtArgs) -> Res {
    let cfg = RunConfig::new(name, a);
    let m = ModelParams::new(0.5, a.kappa_o, a.kappa_d)?;
    let r = transition_report(&m)?;
    emit_json(
        json!({
            "candidates": { "A": r.p_t_a, "B": r.p_t_b },
            "crossing": r.crossing,
            "winner": r.winner,
            "p_t": r.p_t,
            "max_residual_winner": r.max_residual_winner,
        }),
        &a.common,
        &cfg,
    )
}

fn exact_enum(name: &str, a: &ExactEnumArgs) -> Res {
    use twowell::enumeration::{chessboard_check, enumerate, PlaquetteEvent};
    let cfg = RunConfig::new(name, a);
    let m = ModelParams::new(a.p, a.kappa_o, a.kappa_d)?;
    let mut payload = json!({ "summary": to_value(&enumerate(&m)?) });
    if let Some(tol) = a.chessboard {
        let rep = chessboard_check(&m, &PlaquetteEvent::all_checked(), tol)?;
        payload["chessboard"] = to_value(&rep);
    }
    emit_json(payload, &a.common, &cfg)
}

fn tilt_check(name: &str, a: &TiltCheckArgs) -> Res {
    let cfg = RunConfig::new(name, a);
    let deltas = parse_grid(&a.deltas)?;
    let rep = tilt_tail(a.side, a.kappa, a.draws, &deltas, a.seed)?;
    emit_json(to_value(&rep), &a.common, &cfg)
}
