use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use pswitch::approximation::{approx_greedy, bound_greedy, bound_single, ApproxConfig};
use pswitch::format::{parse_circuit, sp_to_dot, Circuit};
use pswitch::oracle::{fig7_experiment, Family, OptimalSize, Oracle};
use pswitch::rational::{from_decimal, parse_fraction};
use pswitch::robustness::{
    bound_general, bound_sp, bound_ssp, error_contribution, worst_case_error_capped,
    worst_case_error_monotone,
};
use pswitch::synthesis::{synth_backward, synth_rule_based};
use pswitch::{EdgeId, PswitchSet, Rational, SwitchState};

use crate::render::Renderer;
use crate::{
    ApproxArgs, CircuitArgs, Cli, CliError, Command, EnumArgs, EvalArgs, FamilyArg, Fig7Args,
    RobustArgs, SynthArgs, TargetArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let r = Renderer {
        format: cli.format,
        digits: cli.digits,
    };
    let oracle = match &cli.cache_dir {
        Some(dir) => Oracle::with_cache_dir(dir),
        None => Oracle::default(),
    };
    let text = match &cli.command {
        Command::Eval(a) => eval(a, r)?,
        Command::Dual(a) => dual(a, r)?,
        Command::Synth(a) => synth(a, r)?,
        Command::Approx(a) => approx(a, r)?,
        Command::Robust(a) => robust(a, r)?,
        Command::Enum(a) => enumerate(a, r, &oracle)?,
        Command::Fig7(a) => fig7(a, &oracle, out)?,
    };
    out.write_all(text.as_bytes())?;
    if !r.is_dot() {
        if let Some(footer) = r.footer() {
            writeln!(out, "{footer}")?;
        }
    }
    Ok(())
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn no_dot(r: Renderer, command: &str) -> Result<()> {
    if r.is_dot() {
        return Err(usage(format!(
            "`{command}` has no circuit to render as DOT"
        )));
    }
    Ok(())
}

fn read_circuit(a: &CircuitArgs) -> Result<Circuit> {
    let text = match (&a.expr, &a.file) {
        (Some(expr), _) => expr.clone(),
        (None, Some(path)) if path == Path::new("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?,
        (None, None) => return Err(usage("no circuit given")),
    };
    Ok(parse_circuit(&text)?)
}

fn parse_target(a: &TargetArgs) -> Result<Rational> {
    match (&a.target, &a.target_decimal) {
        (Some(t), _) => Ok(parse_fraction(t)?),
        (None, Some(pair)) => {
            let places: u32 = pair[1].parse().map_err(|_| {
                usage(format!(
                    "decimal places must be an integer, got {:?}",
                    pair[1]
                ))
            })?;
            Ok(from_decimal(&pair[0], places)?)
        }
        (None, None) => Err(usage("no target given")),
    }
}

fn parse_set(set: &Option<String>, q: Option<u64>) -> Result<PswitchSet> {
    match (set, q) {
        (_, Some(q)) => Ok(PswitchSet::uniform(q)?),
        (Some(list), None) => {
            let values = list
                .split(',')
                .map(|v| parse_fraction(v.trim()))
                .collect::<pswitch::Result<Vec<_>>>()?;
            Ok(PswitchSet::new(values)?)
        }
        (None, None) => Err(usage("give --set or --q")),
    }
}

fn parse_condition(text: &str) -> Result<(usize, SwitchState)> {
    let bad = || usage(format!("expected INDEX=closed or INDEX=open, got {text:?}"));
    let (index, state) = text.split_once('=').ok_or_else(bad)?;
    let index = index.trim().parse().map_err(|_| bad())?;
    let state = match state.trim() {
        "closed" => SwitchState::Closed,
        "open" => SwitchState::Open,
        _ => return Err(bad()),
    };
    Ok((index, state))
}

fn eval(a: &EvalArgs, r: Renderer) -> Result<String> {
    let mut circuit = read_circuit(&a.circuit)?;
    if !a.conditions.is_empty() {
        let mut g = match circuit {
            Circuit::Sp(c) => c.to_general(),
            Circuit::General(g) => g,
        };
        let ids: Vec<EdgeId> = g.edges().iter().map(|e| e.id).collect();
        for text in &a.conditions {
            let (index, state) = parse_condition(text)?;
            let id = *ids.get(index).ok_or(pswitch::Error::UnknownSwitch(index))?;
            g = g.condition(id, state)?;
        }
        circuit = Circuit::General(g);
    }
    if r.is_dot() {
        return Ok(Renderer::dot(&circuit));
    }
    let p = match &circuit {
        Circuit::Sp(c) => c.eval(),
        Circuit::General(g) => g.eval()?,
    };
    Ok(format!("{}\n", r.value(&p)))
}

fn dual(a: &CircuitArgs, r: Renderer) -> Result<String> {
    let Circuit::Sp(c) = read_circuit(a)? else {
        return Err(usage("`dual` needs a series-parallel circuit"));
    };
    let d = c.dual();
    if r.is_dot() {
        return Ok(sp_to_dot(&d));
    }
    Ok(format!(
        "circuit {c}\nclosure {}\ndual {d}\ndual closure {}\n",
        r.value(&c.eval()),
        r.value(&d.eval())
    ))
}

fn synth(a: &SynthArgs, r: Renderer) -> Result<String> {
    let target = parse_target(&a.target)?;
    let s = if a.rule_based {
        synth_rule_based(&target, a.q)?
    } else {
        synth_backward(&target, a.q)?
    };
    if r.is_dot() {
        return Ok(sp_to_dot(&s.circuit));
    }
    let mut text = format!(
        "circuit {}\nclosure {}\nsize {}\n",
        s.circuit,
        r.value(&s.circuit.eval()),
        s.circuit.size()
    );
    if let Some(bound) = &s.bound {
        text += &format!("bound {}\n", bound.tightest());
    }
    if a.trace {
        let d: Vec<String> = s.trace.d_sequence().iter().map(|d| d.to_string()).collect();
        text += &format!("p-sequence {}\n", r.list(&s.trace.p_sequence()));
        text += &format!("d-sequence {}\n", d.join(", "));
        for (k, step) in s.trace.steps.iter().enumerate() {
            text += &format!(
                "step {}: p={} d={} x={} {}\n",
                k + 1,
                r.value(&step.residual),
                step.d,
                r.value(&step.x),
                step.orientation
            );
        }
        text += &format!("leaf {}\n", r.value(&s.trace.terminal_leaf));
    }
    Ok(text)
}

fn approx(a: &ApproxArgs, r: Renderer) -> Result<String> {
    let set = parse_set(&a.set, a.q)?;
    let target = parse_target(&a.target)?;
    let mut cfg = ApproxConfig::new(set.clone(), target, a.n, a.m)?;
    cfg.max_step = a.max_step;
    let result = approx_greedy(&cfg)?;
    if r.is_dot() {
        return Ok(sp_to_dot(&result.circuit));
    }
    let mut text = format!(
        "{} (error {})\ncircuit {}\nsize {}\n",
        r.value(&result.achieved),
        r.value(&result.error),
        result.circuit,
        result.circuit.size()
    );
    for (k, i) in result.insertions.iter().enumerate() {
        text += &format!(
            "insertion {}: p={} x={} {}\n",
            k + 1,
            r.value(&i.before),
            r.value(&i.x),
            i.orientation
        );
    }
    text += &format!(
        "fill {} for residual {} (inner error {})\n",
        result.fill,
        r.value(&result.residual),
        r.value(&result.inner_error)
    );
    text += &format!("attenuation {}\n", r.value(&result.attenuation()));
    if a.m <= 2 {
        text += &format!("bound {}\n", r.value(&bound_greedy(&set, a.n, a.m)?));
    }
    if set.len() == 1 {
        let single = bound_single(&set.values()[0], a.n)?;
        text += &format!(
            "single-pswitch bound {} (attained at target {})\n",
            r.value(&single.bound),
            r.value(&single.worst_target)
        );
    }
    Ok(text)
}

fn robust(a: &RobustArgs, r: Renderer) -> Result<String> {
    no_dot(r, "robust")?;
    let eps = parse_fraction(&a.eps)?;
    let circuit = read_circuit(&a.circuit)?;
    let n = circuit.size();
    let (p, worst, contributions) = match &circuit {
        Circuit::Sp(c) => (
            c.eval(),
            worst(c, &eps, a)?,
            (0..n)
                .map(|i| error_contribution(c, i, &eps))
                .collect::<pswitch::Result<Vec<_>>>()?,
        ),
        Circuit::General(g) => (
            g.eval()?,
            worst(g, &eps, a)?,
            (0..n)
                .map(|i| error_contribution(g, i, &eps))
                .collect::<pswitch::Result<Vec<_>>>()?,
        ),
    };
    let method = if a.monotone {
        "monotone corners"
    } else {
        "all corners"
    };
    let mut text = format!(
        "closure {}\nswitches {n}\nworst-case error {} ({method})\nbound n*eps {}\n",
        r.value(&p),
        r.value(&worst),
        r.value(&bound_general(n, &eps)?)
    );
    if let Circuit::Sp(c) = &circuit {
        let mut values = c.leaf_probs();
        values.sort();
        values.dedup();
        let set = PswitchSet::new(values)?;
        let sp = bound_sp(&set, n, &eps)?;
        text += &format!("bound sp {} = {}\n", sp, sp.describe(r.digits));
        if c.is_ssp() {
            text += &format!("bound ssp {}\n", r.value(&bound_ssp(&set, &eps)?));
        }
    }
    for (i, e) in contributions.iter().enumerate() {
        text += &format!("contribution {i}: {}\n", r.value(e));
    }
    Ok(text)
}

fn worst<N: pswitch::robustness::Network>(
    c: &N,
    eps: &Rational,
    a: &RobustArgs,
) -> Result<Rational> {
    Ok(if a.monotone {
        worst_case_error_monotone(c, eps)?
    } else {
        worst_case_error_capped(c, eps, a.vertex_cap)?
    })
}

fn enumerate(a: &EnumArgs, r: Renderer, oracle: &Oracle) -> Result<String> {
    no_dot(r, "enum")?;
    let set = parse_set(&a.set, a.q)?;
    let family = match a.family {
        FamilyArg::Sp => Family::Sp,
        FamilyArg::Ssp => Family::Ssp,
    };
    let target = a.target.as_deref().map(parse_fraction).transpose()?;
    let table = oracle.enumerate(&set, a.max_size, family)?;
    let mut text = String::new();
    if let Some(target) = target {
        match table.classify(&target) {
            OptimalSize::Size(k) => {
                text += &format!("optimal size {k}\n");
                if let Some(w) = table.witness(&target) {
                    text += &format!("witness {w}\n");
                }
            }
            OptimalSize::NotWithin(max) => {
                text += &format!("not realizable with at most {max} pswitches\n")
            }
            OptimalSize::Never => text += "not realizable by any series-parallel circuit\n",
        }
        return Ok(text);
    }
    for k in 1..=table.max_size() {
        if a.list {
            for v in table.values_at(k) {
                text += &format!("{k} {}\n", r.value(v));
            }
        } else {
            text += &format!("size {k}: {} values\n", table.values_at(k).count());
        }
    }
    text += &format!("total {}\n", table.len());
    Ok(text)
}

fn fig7(a: &Fig7Args, oracle: &Oracle, out: &mut dyn Write) -> Result<String> {
    let sizes =
        a.n.split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| usage(format!("expected comma-separated sizes, got {:?}", a.n)))?;
    let report = fig7_experiment(a.q, &sizes, oracle)?;
    let failures = report.failures();
    write!(out, "{report}")?;
    if failures.is_empty() {
        return Ok("all sizes within bound\n".into());
    }
    for f in &failures {
        writeln!(out, "{f}")?;
    }
    Err(CliError::Failed(format!(
        "{} checks failed",
        failures.len()
    )))
}
