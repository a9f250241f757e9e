use std::collections::BTreeMap;

use harmonic_paths::functional::{amplitude_p, amplitude_x, partition_functional, BreakpointTable};
use harmonic_paths::greens::classical_path_x;
use harmonic_paths::smearing::Argument;
use harmonic_paths::wick::{connected_census, OperatorWord};
use harmonic_paths::{
    build_distribution, format_table, run_battery, solve_fundamental, AmplitudeValue, Channel,
    CurrentPair, GreensEvaluator, LocalFunction, Representation, SmearingMode,
};
use serde::Serialize;

use crate::config::{section, GreensOutput, Loaded};
use crate::CliError;

const DEFAULT_INTERVALS: usize = 8;

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    s.push('\n');
    Ok(s)
}

pub fn greens(l: &Loaded) -> Result<String, CliError> {
    let g = section(&l.config.greens, "greens")?;
    let pair = solve_fundamental(&l.profile, l.n_steps)?;
    match g.output {
        GreensOutput::Fundamental => Ok(pair.to_csv()),
        GreensOutput::Green => {
            let rep = g
                .representation
                .ok_or_else(|| CliError::Config("[greens] needs a representation".into()))?;
            let e = GreensEvaluator::new(&pair, rep)?;
            Ok(e.grid_csv(
                g.channel.unwrap_or(Channel::Jj),
                g.intervals.unwrap_or(DEFAULT_INTERVALS),
            )?)
        }
    }
}

#[derive(Serialize)]
struct AmplitudeOut {
    representation: Representation,
    action_re: f64,
    action_im: f64,
    prefactor_re: f64,
    prefactor_im: f64,
    value_re: f64,
    value_im: f64,
}

impl AmplitudeOut {
    fn new(representation: Representation, v: AmplitudeValue) -> Self {
        Self {
            representation,
            action_re: v.action.re,
            action_im: v.action.im,
            prefactor_re: v.prefactor.re,
            prefactor_im: v.prefactor.im,
            value_re: v.value.re,
            value_im: v.value.im,
        }
    }
}

pub fn amplitude(l: &Loaded) -> Result<String, CliError> {
    let a = section(&l.config.amplitude, "amplitude")?;
    let pair = solve_fundamental(&l.profile, l.n_steps)?;
    let eval = |table: &Option<BreakpointTable>, t| table.as_ref().map_or(0.0, |b| b.eval(t));
    let mut currents = CurrentPair::from_fns(&pair, |t| eval(&a.j, t), |t| eval(&a.k, t));
    for i in &a.j_impulses {
        currents = currents.with_j_impulse(i.time, i.weight);
    }
    for i in &a.k_impulses {
        currents = currents.with_k_impulse(i.time, i.weight);
    }
    let value = match a.representation {
        Representation::DirichletX => amplitude_x(&pair, a.start, a.end, &currents, &l.params)?,
        Representation::MomentumP => amplitude_p(&pair, a.start, a.end, &currents, &l.params)?,
        Representation::Periodic => {
            if a.start != 0.0 || a.end != 0.0 {
                return Err(CliError::Config(
                    "periodic amplitude takes no end values".into(),
                ));
            }
            partition_functional(&pair, &currents, &l.params)?
        }
    };
    json(&AmplitudeOut::new(a.representation, value))
}

#[derive(Serialize)]
struct CorrelatorOut {
    mode: SmearingMode,
    omega_ref: f64,
    value_re: f64,
    value_im: f64,
    det_g: f64,
    det_via_c: Option<f64>,
    det_via_a: Option<f64>,
    det_delta_c: Option<f64>,
    det_delta_a: Option<f64>,
    det_route_relative: Option<f64>,
}

pub fn correlator(l: &Loaded, mode: Option<SmearingMode>) -> Result<String, CliError> {
    let c = section(&l.config.correlator, "correlator")?;
    let mode = mode.unwrap_or(c.mode);
    if c.representation == Representation::MomentumP {
        return Err(CliError::Config(
            "correlator representation must be dirichlet_x or periodic".into(),
        ));
    }
    if c.classical.is_some() && c.representation != Representation::DirichletX {
        return Err(CliError::Config(
            "a classical path needs dirichlet_x".into(),
        ));
    }
    let pair = solve_fundamental(&l.profile, l.n_steps)?;
    let e = GreensEvaluator::new(&pair, c.representation)?;
    let path = match &c.classical {
        Some(ends) => Some(classical_path_x(&pair, ends.start, ends.end, &l.params)?),
        None => None,
    };
    let (xs, ps): (Vec<_>, Vec<_>) = c
        .insertions
        .iter()
        .partition(|i| i.function.argument == Argument::Position);
    let times = |v: &[&crate::config::Insertion]| v.iter().map(|i| i.time).collect::<Vec<_>>();
    let functions: Vec<LocalFunction> = xs.iter().chain(&ps).map(|i| i.function.clone()).collect();
    let d = build_distribution(
        &times(&xs),
        &times(&ps),
        &e,
        path.as_ref(),
        &l.params,
        c.omega_ref,
        mode,
    )?;
    let value = d.expectation(&functions)?;
    let det_g = d.det_g();
    json(&CorrelatorOut {
        mode,
        omega_ref: c.omega_ref,
        value_re: value.re,
        value_im: value.im,
        det_g,
        det_via_c: d.det_via_c(),
        det_via_a: d.det_via_a(),
        det_delta_c: d.det_via_c().map(|v| (v - det_g).abs()),
        det_delta_a: d.det_via_a().map(|v| (v - det_g).abs()),
        det_route_relative: d.det_cross_check(),
    })
}

#[derive(Serialize)]
struct SignatureOut {
    text: String,
    multiplicity: u64,
    cross: BTreeMap<Channel, usize>,
    loops_v1: BTreeMap<Channel, usize>,
    loops_v2: BTreeMap<Channel, usize>,
}

#[derive(Serialize)]
struct DiagramsOut {
    vertex: String,
    order: u32,
    connected: u64,
    disconnected: u64,
    total: u64,
    multiplicities: Vec<u64>,
    signatures: Vec<SignatureOut>,
}

pub fn diagrams(l: &Loaded) -> Result<String, CliError> {
    let d = section(&l.config.diagrams, "diagrams")?;
    let word = OperatorWord::parse_monomial(&d.vertex, 1)
        .map_err(|e| CliError::Config(format!("vertex: {e}")))?;
    let census = connected_census(&word, d.order)?;
    for s in &census.signatures {
        println!("{s}");
    }
    println!(
        "connected {} + disconnected {} = {}",
        census.connected, census.disconnected, census.total
    );
    json(&DiagramsOut {
        vertex: census.vertex.clone(),
        order: d.order,
        connected: census.connected,
        disconnected: census.disconnected,
        total: census.total,
        multiplicities: census.multiplicities(),
        signatures: census
            .signatures
            .iter()
            .map(|s| SignatureOut {
                text: s.to_string(),
                multiplicity: s.multiplicity,
                cross: s.cross.clone(),
                loops_v1: s.loops_v1.clone(),
                loops_v2: s.loops_v2.clone(),
            })
            .collect(),
    })
}

pub fn validate() -> Result<String, CliError> {
    let rows = run_battery();
    print!("{}", format_table(&rows));
    let failed = rows.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Validation { failed });
    }
    json(&rows)
}
