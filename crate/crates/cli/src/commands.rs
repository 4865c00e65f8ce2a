use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, bail, Context};
use serde_json::{json, Value};

use gcmax::certificate::{
    check_max_nonneg, check_nf_condition, helly_check, lambda_polytope, solve_lp, solve_recursive, solve_two,
    Certificate, SimplexPoint,
};
use gcmax::convexity::check_convexity;
use gcmax::generate::{generate_instances, FnStrategy, GeneratorSpec, MagmaKind};
use gcmax::instance::{serialize_instance, ConvexityParams};
use gcmax::kkt::{kkt_multipliers, kkt_verify_converse, shift_objective, solve_mp_bruteforce};
use gcmax::opcalc::{synthesize_ratio_bounded, OpTerm};
use gcmax::{Error, Instance, Params, Rational, Scalar};

use crate::{GenArgs, KktArgs, Method, OpcalcAction, TermParams};

/// A finished command: JSON document, plain-text rendering and exit code.
pub struct Report {
    pub json: Value,
    pub human: String,
    pub exit: u8,
}

fn rational(text: &str, what: &str) -> anyhow::Result<Rational> {
    Rational::parse_scalar(text).ok_or_else(|| anyhow!("{what}: not a rational number: {text:?}"))
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(Scalar::to_canonical).collect()
}

fn tuple(values: &[Rational]) -> String {
    format!("({})", strings(values).join(", "))
}

pub fn check(inst: &Instance) -> anyhow::Result<Report> {
    let (p, q) = (inst.params.p(), inst.params.q());
    let mut all = true;
    let mut rows = Vec::new();
    let mut human = String::new();
    for f in &inst.functions {
        let violations = check_convexity(inst.magma.table(), p, q, f)?;
        all &= violations.is_empty();
        if let Some(v) = violations.first() {
            let _ = writeln!(
                human,
                "{}: not convex, {} violating pairs, first ({}, {}): {} > {}",
                f.name,
                violations.len(),
                inst.element_name(v.x),
                inst.element_name(v.y),
                v.lhs,
                v.rhs
            );
        } else {
            let _ = writeln!(human, "{}: convex", f.name);
        }
        rows.push(json!({
            "name": f.name,
            "convex": violations.is_empty(),
            "violations": violations.iter().map(|v| json!({
                "x": v.x,
                "y": v.y,
                "lhs": v.lhs.to_canonical(),
                "rhs": v.rhs.to_canonical(),
            })).collect::<Vec<_>>(),
        }));
    }
    Ok(Report { json: json!({ "all_convex": all, "functions": rows }), human, exit: if all { 0 } else { 1 } })
}

pub fn solve(inst: &Instance, method: Method) -> anyhow::Result<Report> {
    let fns = &inst.functions;
    let cert = match method {
        Method::Lp => solve_lp(fns)?,
        Method::Recursive => solve_recursive(fns, &inst.magma, &inst.params)?,
        Method::Two => match fns.as_slice() {
            [f, g] => solve_two(f, g)?,
            _ => return Err(Error::TwoFunctionsRequired(fns.len()).into()),
        },
    };
    let method_name = match method {
        Method::Lp => "lp",
        Method::Recursive => "recursive",
        Method::Two => "two",
    };
    let mut doc = json!({ "method": method_name });
    if let (Value::Object(out), Value::Object(body)) = (&mut doc, cert.to_json()) {
        out.extend(body);
    }
    let human = match &cert {
        Certificate::Feasible { lambda, margin } => {
            format!("feasible: lambda = {}, margin {}", tuple(lambda.weights()), margin)
        }
        Certificate::Infeasible { witness } => {
            let names: Vec<String> = witness.elements().iter().map(|&x| inst.element_name(x)).collect();
            format!("infeasible: witness elements {{{}}}", names.join(", "))
        }
    };
    Ok(Report { json: doc, human, exit: if cert.is_feasible() { 0 } else { 1 } })
}

pub fn diagnose(inst: &Instance) -> anyhow::Result<Report> {
    let fns = &inst.functions;
    let nf = check_nf_condition(fns)?;
    let helly = helly_check(fns)?;
    let max_neg = check_max_nonneg(fns)?;
    let sets = (0..inst.magma.size()).map(|x| lambda_polytope(fns, x)).collect::<Result<Vec<_>, _>>()?;

    let mut human = String::new();
    match &max_neg {
        None => human.push_str("max >= 0: holds\n"),
        Some(x) => {
            let _ = writeln!(human, "max >= 0: fails at {}", inst.element_name(*x));
        }
    }
    match &nf {
        None => human.push_str("tuple condition: holds\n"),
        Some(w) => {
            let names: Vec<String> = w.tuple.iter().map(|&x| inst.element_name(x)).collect();
            let _ = writeln!(
                human,
                "tuple condition: fails at ({}) with t = {}, value {}",
                names.join(", "),
                tuple(w.t.weights()),
                w.value
            );
        }
    }
    match &helly {
        None => human.push_str("helly: every subfamily intersects\n"),
        Some(s) => {
            let names: Vec<String> = s.iter().map(|&x| inst.element_name(x)).collect();
            let _ = writeln!(human, "helly: empty intersection on {{{}}}", names.join(", "));
        }
    }
    for set in &sets {
        let _ = writeln!(human, "Lambda_{}: {}", inst.element_name(set.element), set.describe());
    }

    let holds = nf.is_none() && helly.is_none();
    let doc = json!({
        "max_nonneg": { "holds": max_neg.is_none(), "witness": max_neg },
        "nf_condition": {
            "holds": nf.is_none(),
            "witness": nf.as_ref().map(|w| json!({
                "tuple": w.tuple,
                "t": strings(w.t.weights()),
                "value": w.value.to_canonical(),
            })),
        },
        "helly": { "holds": helly.is_none(), "witness": helly },
        "lambda_sets": sets.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
    });
    Ok(Report { json: doc, human, exit: if holds { 0 } else { 1 } })
}

fn term_params(flags: &TermParams, inst: Option<&Instance>) -> anyhow::Result<Params> {
    let pick = |flag: &Option<String>, from: Option<&Rational>, name: &str| -> anyhow::Result<Rational> {
        match (flag, from) {
            (Some(text), _) => rational(text, name),
            (None, Some(v)) => Ok(v.clone()),
            (None, None) => bail!("--{name} is required without --input"),
        }
    };
    let p = pick(&flags.p, inst.map(|i| i.params.p()), "p")?;
    let q = pick(&flags.q, inst.map(|i| i.params.q()), "q")?;
    Ok(ConvexityParams::new(p, q)?)
}

fn term_report(term: &OpTerm<Rational>, inst: Option<&Instance>) -> Report {
    let (a, b) = term.coefficients();
    let mut doc = json!({
        "term": term.to_string(),
        "a": a.to_canonical(),
        "b": b.to_canonical(),
        "ratio": term.ratio().to_canonical(),
        "depth": term.depth(),
    });
    let mut human = format!("term: {term}\ncoefficients: ({a}, {b})\nratio: {}\ndepth: {}\n", term.ratio(), term.depth());
    if let Some(inst) = inst {
        let op = term.realize(&inst.magma);
        doc["table"] = json!(op.table);
        human.push_str("table:\n");
        for row in &op.table {
            let cells: Vec<String> = row.iter().map(|&z| inst.element_name(z)).collect();
            let _ = writeln!(human, "  {}", cells.join(" "));
        }
    }
    Report { json: doc, human, exit: 0 }
}

pub fn opcalc(action: &OpcalcAction, inst: Option<&Instance>) -> anyhow::Result<Report> {
    match action {
        OpcalcAction::Synth { params, lo, hi, max_depth } => {
            let params = term_params(params, inst)?;
            let (lo, hi) = (rational(lo, "lo")?, rational(hi, "hi")?);
            let term = synthesize_ratio_bounded(&params, &lo, &hi, Some(*max_depth))?;
            Ok(term_report(&term, inst))
        }
        OpcalcAction::Eval { params, term } => {
            let params = term_params(params, inst)?;
            Ok(term_report(&OpTerm::parse(term, &params)?, inst))
        }
        OpcalcAction::Realize { params, term } => {
            let inst = inst.context("realize needs --input")?;
            let params = term_params(params, Some(inst))?;
            Ok(term_report(&OpTerm::parse(term, &params)?, Some(inst)))
        }
    }
}

pub fn kkt(inst: &Instance, args: &KktArgs) -> anyhow::Result<Report> {
    let (index, f0) = inst.function(&args.objective)?;
    let constraints: Vec<_> =
        inst.functions.iter().enumerate().filter(|&(i, _)| i != index).map(|(_, f)| f.clone()).collect();
    let x0 = inst.element_index(&args.x0)?;
    let f0 = if args.shift_objective {
        shift_objective(f0, x0, &inst.magma, &inst.params)?
    } else {
        f0.clone()
    };
    let names: Vec<&str> = constraints.iter().map(|f| f.name.as_str()).collect();
    let mut doc = json!({
        "objective": f0.name,
        "constraints": names,
        "x0": x0,
    });
    if args.shift_objective {
        doc["shifted_objective"] = json!(strings(&f0.values));
    }

    if let Some(weights) = &args.verify {
        let weights = weights.iter().map(|w| rational(w, "--verify")).collect::<anyhow::Result<Vec<_>>>()?;
        let lambda = SimplexPoint::new(weights)?;
        let holds = kkt_verify_converse(&f0, &constraints, x0, &lambda)?;
        let transversality: Vec<Rational> =
            lambda.weights()[1..].iter().zip(&constraints).map(|(l, c)| l.clone() * c.at(x0).clone()).collect();
        let minimizers = solve_mp_bruteforce(&f0, &constraints)?;
        doc["lambda"] = json!(strings(lambda.weights()));
        doc["transversality_products"] = json!(strings(&transversality));
        doc["conditions_hold"] = json!(holds);
        doc["minimizers"] = json!(minimizers);
        let human = format!(
            "lambda = {}: conditions {}\ntransversality products: {}\nminimizers: {:?}\n",
            tuple(lambda.weights()),
            if holds { "hold, x0 is a solution" } else { "fail" },
            tuple(&transversality),
            minimizers
        );
        return Ok(Report { json: doc, human, exit: if holds { 0 } else { 1 } });
    }

    let res = kkt_multipliers(&f0, &constraints, x0, &inst.magma, &inst.params)?;
    if let (Value::Object(out), Value::Object(body)) = (&mut doc, res.to_json()) {
        out.extend(body);
    }
    let mut human = format!(
        "lambda = {}\ntransversality products: {}\nEL margin: {}\nminimizers: {:?}\n",
        tuple(res.lambda.weights()),
        tuple(&res.transversality_products),
        res.el_margin,
        res.minimizers
    );
    if res.is_degenerate() {
        human.push_str("warning: degenerate multiplier, converse inapplicable\n");
    }
    Ok(Report { json: doc, human, exit: 0 })
}

pub fn gen(args: &GenArgs, seed: u64) -> anyhow::Result<Report> {
    let spec = GeneratorSpec {
        magma_kind: args.kind.parse::<MagmaKind>().map_err(|e| anyhow!(e))?,
        m: args.m,
        params: ConvexityParams::new(rational(&args.p, "p")?, rational(&args.q, "q")?)?,
        fn_strategy: args.strategy.parse::<FnStrategy>().map_err(|e| anyhow!(e))?,
        seed,
        count: args.count,
        functions: args.functions,
        max_nonneg: args.max_nonneg,
    };
    let instances = generate_instances(&spec)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let mut files = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let path = args.out_dir.join(format!("instance-{i:04}.json"));
        fs::write(&path, serialize_instance(inst)).with_context(|| format!("cannot write {}", path.display()))?;
        files.push(path.display().to_string());
    }
    let human = format!("wrote {} instances to {}\n", files.len(), args.out_dir.display());
    let doc = json!({
        "kind": spec.magma_kind.to_string(),
        "strategy": spec.fn_strategy.to_string(),
        "seed": seed,
        "files": files,
    });
    Ok(Report { json: doc, human, exit: 0 })
}
