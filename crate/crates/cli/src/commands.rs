use std::fmt::Write as _;
use std::path::Path;

use renege_talk::binary::{construct_profile, construct_profile_with_mix, make_binary, wrp_interval};
use renege_talk::continuum::{certify_cs, discretize, frontier_curve, ContinuumSpec, CsOutcome};
use renege_talk::format::fmt_sig;
use renege_talk::model::geometry::feasible_hull;
use renege_talk::model::{check_assumptions, expected_payoffs, feasible_set_with, minmax};
use renege_talk::repeated::{
    run_path, AutomatonFile, GameRef, ScriptedDeviation, ThreePhaseAutomaton,
};
use renege_talk::wrp::{
    assess_point, receiver_gap, scan_frontier, verify_certificate, BeyondLimit, ProfileFile, SearchOptions,
    WrpCertificate,
};
use renege_talk::{Error, Exec, FiniteCheapTalkGame, PayoffProfile, ReceiverStrategy, SenderStrategy};
use serde_json::json;

use crate::io::{emit, json_text, parse_json, read_game, read_text, with_file, CliResult, Failure};
use crate::{BinaryArgs, BinaryFigure, CsArgs, CsSub, GameCmd, SearchArgs, SimCmd, WrpCmd};

fn missing(flag: &str, why: &str) -> Failure {
    Failure::Lib(Error::Invalid { invariant: format!("{flag} is required {why}"), location: Some(flag.into()) })
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn options(s: &SearchArgs) -> SearchOptions {
    SearchOptions {
        partition_limit: s.partition_limit,
        beyond_limit: if s.intervals { BeyondLimit::Intervals } else { BeyondLimit::Fail },
    }
}

fn column_of_constant(rows: &[f64]) -> usize {
    rows.iter().position(|&p| p > 0.5).unwrap_or(0)
}

pub fn game(cmd: GameCmd, exec: Exec) -> CliResult {
    match cmd {
        GameCmd::Validate { game } => {
            let g = read_game(&game)?;
            let report = check_assumptions(&g);
            let out = json!({
                "valid": true,
                "states": g.num_states(),
                "actions": g.num_actions(),
                "assumptionsHold": report.all_hold(),
                "assumptions": report,
            });
            emit(None, &json_text(&out))
        }
        GameCmd::Payoffs { game, profile } => {
            let g = read_game(&game)?;
            let file: ProfileFile = parse_json(&read_text(&profile)?, &profile)?;
            let sigma = SenderStrategy::from_rows(&g, file.sender).map_err(|e| with_file(e, &profile))?;
            let rho = ReceiverStrategy::from_rows(&g, file.receiver).map_err(|e| with_file(e, &profile))?;
            emit(None, &json_text(&expected_payoffs(&g, &sigma, &rho)))
        }
        GameCmd::Minmax { game } => {
            let g = read_game(&game)?;
            let m = minmax(&g);
            let out = json!({
                "uBarS": m.sender,
                "uBarR": m.receiver,
                "senderWitnessMessage": g.states()[column_of_constant(m.sender_witness.kernel().row(0))],
                "receiverWitnessAction": g.actions()[column_of_constant(m.receiver_witness.kernel().row(0))],
            });
            emit(None, &json_text(&out))
        }
        GameCmd::Frontier { game, grid, out } => {
            let g = read_game(&game)?;
            let set = feasible_set_with(&g, grid, exec)?;
            let mut csv = String::from("kind,weight,vS,vR\n");
            for v in &set.hull_vertices {
                let _ = writeln!(csv, "vertex,,{},{}", fmt_sig(v.sender), fmt_sig(v.receiver));
            }
            for p in &set.pareto_frontier {
                let _ = writeln!(
                    csv,
                    "frontier,{},{},{}",
                    fmt_sig(p.weight),
                    fmt_sig(p.payoff.sender),
                    fmt_sig(p.payoff.receiver)
                );
            }
            emit(out.as_deref(), &csv)
        }
    }
}

pub fn wrp(cmd: WrpCmd, exec: Exec) -> CliResult {
    match cmd {
        WrpCmd::Certify { game, v_s, v_r, verify, mode, out, search } => {
            let g = read_game(&game)?;
            if let Some(path) = verify {
                let cert = WrpCertificate::from_json(&g, &read_text(&path)?).map_err(|e| with_file(e, &path))?;
                let report = verify_certificate(&g, &cert, mode)?;
                emit(out.as_deref(), &json_text(&report))?;
                return if report.valid { Ok(()) } else { Err(Failure::Negative) };
            }
            let target = PayoffProfile::new(
                v_s.ok_or_else(|| missing("--vs", "without --verify"))?,
                v_r.ok_or_else(|| missing("--vr", "without --verify"))?,
            );
            let assessment = assess_point(&g, target, options(&search))?;
            match assessment.outcome {
                Ok(cert) => emit(out.as_deref(), &json_text(&cert.to_file())),
                Err(refusal) => {
                    eprintln!("refused: {refusal}");
                    Err(Failure::Negative)
                }
            }
        }
        WrpCmd::Scan { game, grid, out, search } => {
            let g = read_game(&game)?;
            let rows = scan_frontier(&g, grid, options(&search), exec)?;
            let mut csv = String::from("lambda,vS,vR,wrp,capS,frontier_vS_max,margin\n");
            for r in rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    fmt_sig(r.position),
                    fmt_sig(r.payoff.sender),
                    fmt_sig(r.payoff.receiver),
                    flag(r.wrp),
                    fmt_sig(r.cap_s),
                    fmt_sig(r.frontier_vs_max),
                    fmt_sig(r.margin)
                );
            }
            emit(out.as_deref(), &csv)
        }
        WrpCmd::Gap { game, grid, out } => {
            let g = read_game(&game)?;
            let report = receiver_gap(&g, grid, exec)?;
            emit(out.as_deref(), &json_text(&report))
        }
    }
}

pub fn binary(args: BinaryArgs, exec: Exec) -> CliResult {
    if let Some(BinaryFigure::Figure1 { alpha, grid, out }) = args.figure {
        return emit(out.as_deref(), &figure1(alpha, grid, exec)?);
    }
    let alpha = args.alpha.ok_or_else(|| missing("--alpha", "for the binary game"))?;
    if !args.interval && !args.construct {
        return Err(missing("--interval or --construct", "to pick an output"));
    }
    if args.interval {
        let (lo, hi) = wrp_interval(alpha)?;
        emit(None, &format!("lo={lo:.6} hi={hi:.6}\n"))?;
    }
    if args.construct {
        let nu = args.nu.ok_or_else(|| missing("--nu", "with --construct"))?;
        let cert = if args.mixed { construct_profile_with_mix(alpha, nu)? } else { construct_profile(alpha, nu)? };
        emit(args.out.as_deref(), &json_text(&cert.to_file()))?;
    }
    Ok(())
}

/// Receiver payoffs where the horizontal line `vR = level` crosses the hull.
fn horizontal_chord(hull: &[PayoffProfile], level: f64) -> Option<(f64, f64)> {
    let n = hull.len();
    let mut xs = Vec::new();
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        let (lo, hi) = if a.receiver <= b.receiver { (a, b) } else { (b, a) };
        if level < lo.receiver || level > hi.receiver {
            continue;
        }
        if hi.receiver == lo.receiver {
            xs.extend([lo.sender, hi.sender]);
        } else {
            let t = (level - lo.receiver) / (hi.receiver - lo.receiver);
            xs.push(lo.sender + t * (hi.sender - lo.sender));
        }
    }
    let min = xs.iter().copied().reduce(f64::min)?;
    let max = xs.iter().copied().reduce(f64::max)?;
    Some((min, max))
}

fn figure1(alpha: f64, grid: usize, exec: Exec) -> CliResult<String> {
    let g = make_binary(alpha)?;
    let hull = feasible_hull(&g);
    let mm = minmax(&g);
    let mut csv = String::from("kind,vS,vR,wrp\n");
    for v in &hull {
        let _ = writeln!(csv, "vertex,{},{},", fmt_sig(v.sender), fmt_sig(v.receiver));
    }
    if let Some((lo, hi)) = horizontal_chord(&hull, mm.receiver) {
        for x in [lo, hi] {
            let _ = writeln!(csv, "minmax,{},{},", fmt_sig(x), fmt_sig(mm.receiver));
        }
    }
    for r in scan_frontier(&g, grid, SearchOptions::default(), exec)? {
        let _ = writeln!(csv, "frontier,{},{},{}", fmt_sig(r.payoff.sender), fmt_sig(r.payoff.receiver), flag(r.wrp));
    }
    Ok(csv)
}

fn figure2(bias: f64, grid: usize, exec: Exec) -> CliResult<String> {
    let spec = ContinuumSpec::new(bias)?;
    let points = frontier_curve(&spec, grid)?;
    let flags = exec.map(points.len(), |i| -> renege_talk::Result<bool> {
        let l = points[i].lambda;
        if l > 0.0 && l < 0.5 {
            Ok(certify_cs(&spec, l)?.certificate().is_some())
        } else {
            Ok(false)
        }
    });
    let mut csv = String::from("lambda,lambdaTilde,vS,vR,certified\n");
    for (p, ok) in points.iter().zip(flags) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_sig(p.lambda),
            fmt_sig(p.lambda_tilde),
            fmt_sig(p.payoff.sender),
            fmt_sig(p.payoff.receiver),
            flag(ok?)
        );
    }
    Ok(csv)
}

pub fn cs(args: CsArgs, exec: Exec) -> CliResult {
    match args.sub {
        Some(CsSub::Discretize { bias, n_states, n_actions, out }) => {
            let g = discretize(&ContinuumSpec::new(bias)?, n_states, n_actions)?;
            return emit(out.as_deref(), &json_text(&g.to_file()));
        }
        Some(CsSub::Figure2 { bias, grid, out }) => return emit(out.as_deref(), &figure2(bias, grid, exec)?),
        None => {}
    }
    let bias = args.bias.ok_or_else(|| missing("--bias", "for the continuum game"))?;
    let spec = ContinuumSpec::new(bias)?;
    if args.frontier {
        let mut csv = String::from("lambda,lambdaTilde,vS,vR\n");
        for p in frontier_curve(&spec, args.grid)? {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                fmt_sig(p.lambda),
                fmt_sig(p.lambda_tilde),
                fmt_sig(p.payoff.sender),
                fmt_sig(p.payoff.receiver)
            );
        }
        return emit(args.out.as_deref(), &csv);
    }
    if !args.certify {
        return Err(missing("--certify or --frontier", "to pick an output"));
    }
    let lambda = args.lambda.ok_or_else(|| missing("--lambda", "with --certify"))?;
    match certify_cs(&spec, lambda)? {
        CsOutcome::Certified(c) => {
            let out = json!({
                "certified": true,
                "lambda": c.lambda,
                "lambdaTilde": c.lambda_tilde,
                "target": c.target,
                "w": c.w,
                "receiverPunishment": {
                    "y": c.receiver_punishment.y,
                    "pooledAction": c.receiver_punishment.pooled_action,
                    "senderValue": c.receiver_punishment.sender_value,
                    "receiverDeviation": c.receiver_punishment.receiver_deviation,
                },
                "senderPunishment": {
                    "x": c.sender_punishment.x,
                    "receiverValue": c.sender_punishment.receiver_value,
                    "deviationCap": c.sender_punishment.deviation_cap,
                },
            });
            emit(args.out.as_deref(), &json_text(&out))
        }
        CsOutcome::Refused { lambda, target, violated } => {
            let out = json!({ "certified": false, "lambda": lambda, "target": target, "violated": violated });
            emit(args.out.as_deref(), &json_text(&out))?;
            Err(Failure::Negative)
        }
    }
}

fn load_automaton(path: &Path) -> CliResult<ThreePhaseAutomaton> {
    let file: AutomatonFile = parse_json(&read_text(path)?, path)?;
    let game = match &file.game {
        GameRef::Path(p) => {
            let base = path.parent().unwrap_or(Path::new("."));
            read_game(&base.join(p))?
        }
        GameRef::Inline(g) => FiniteCheapTalkGame::from_file(g.clone()).map_err(|e| with_file(e, path))?,
    };
    Ok(ThreePhaseAutomaton::from_file(&file, game).map_err(|e| with_file(e, path))?)
}

pub fn sim(cmd: SimCmd, _exec: Exec) -> CliResult {
    match cmd {
        SimCmd::Check { automaton, delta, tol, min_delta, grid, out } => {
            let auto = load_automaton(&automaton)?;
            let spe = auto.check_spe(delta, tol)?;
            let ranking = auto.check_wrp_phases(delta)?;
            let min_delta = if min_delta { Some(auto.min_delta(grid)?) } else { None };
            let report = json!({
                "delta": delta,
                "spe": spe,
                "phases": ranking,
                "minDelta": min_delta,
            });
            emit(out.as_deref(), &json_text(&report))
        }
        SimCmd::Run { automaton, delta, periods, seed, deviations, out } => {
            let auto = load_automaton(&automaton)?;
            let script: Vec<ScriptedDeviation> = match &deviations {
                Some(p) => parse_json(&read_text(p)?, p)?,
                None => Vec::new(),
            };
            let trace = run_path(&auto, delta, periods, seed, &script)?;
            if let Some(path) = out.as_deref() {
                let g = auto.game();
                let mut csv = String::from("t,phase,state,message,action,uS,uR\n");
                for r in &trace.records {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{}",
                        r.t,
                        r.phase,
                        g.states()[r.state],
                        g.states()[r.message],
                        g.actions()[r.action],
                        fmt_sig(r.u_sender),
                        fmt_sig(r.u_receiver)
                    );
                }
                emit(Some(path), &csv)?;
            }
            emit(None, &json_text(&trace.summary))
        }
    }
}
