use std::collections::BTreeMap;

use krawtchouk::arith::{
    check_probability, format_real, parse_rational, parse_real, rational_to_real, Float, Precision,
    Rational,
};
use krawtchouk::expansion::{
    classical_limit, corollary1_eval, symbolic_expansion, PsiBound, Theorem2,
};
use krawtchouk::orthopoly::{
    hermite_real, krawtchouk_hypergeometric, krawtchouk_nonnormalized, krawtchouk_real,
    KrawtchoukParams, ScaledPoint,
};
use krawtchouk::stirling::rho_real;
use krawtchouk::verify::{uniform_sweep, Claim, GridSpec, Sampling, SweepConfig};
use krawtchouk::{Error, Form, Result};

use crate::args::{
    Common, EvalArgs, ExpandArgs, FormArg, Format, PsiBoundArg, SamplingArg, TableArgs, VerifyArgs,
};
use crate::render::{Document, Table};

/// A rendered document plus whether every check it ran succeeded.
pub struct Outcome {
    pub document: Document,
    pub format: Format,
    pub verified: bool,
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

struct Resolved {
    p: Rational,
    prec: Precision,
    form: Form,
    format: Format,
}

fn resolve(common: &Common, default_format: Format) -> Result<Resolved> {
    let p = parse_rational(&common.p)?;
    check_probability(&p)?;
    Ok(Resolved {
        p,
        prec: Precision::new(common.prec)?,
        form: match common.form {
            FormArg::Printed => Form::Printed,
            FormArg::Corrected => Form::Corrected,
        },
        format: common.format.unwrap_or(default_format),
    })
}

fn base_config(r: &Resolved) -> BTreeMap<String, String> {
    let mut c = BTreeMap::new();
    c.insert("p".into(), r.p.to_string());
    c.insert("prec".into(), r.prec.bits().to_string());
    c.insert("form".into(), form_name(r.form).into());
    c.insert("format".into(), r.format.name().into());
    c
}

fn form_name(form: Form) -> &'static str {
    match form {
        Form::Printed => "printed",
        Form::Corrected => "corrected",
    }
}

fn psi_bound(arg: PsiBoundArg) -> (PsiBound, &'static str) {
    match arg {
        PsiBoundArg::Literal => (PsiBound::Literal, "literal"),
        PsiBoundArg::Matched => (PsiBound::Matched, "matched"),
    }
}

/// Rationals come in exactly; anything else is read as a real at the
/// working precision, with a warning.
fn parse_x(literal: &str, prec: Precision) -> Result<Float> {
    match parse_rational(literal) {
        Ok(r) => Ok(rational_to_real(&r, prec)),
        Err(_) => {
            eprintln!(
                "warning: x = {literal} is not an exact literal; rounded to {} bits",
                prec.bits()
            );
            parse_real(literal, prec)
        }
    }
}

pub fn eval(a: &EvalArgs) -> Result<Outcome> {
    let r = resolve(&a.common, Format::Text)?;
    let prec = r.prec;
    let digits = prec.decimal_digits();
    let fmt = |x: &Float| format_real(x, digits);
    let params = KrawtchoukParams::new(r.p.clone(), a.big_n, a.n)?;

    let mut config = base_config(&r);
    config.insert("N".into(), a.big_n.to_string());
    config.insert("n".into(), a.n.to_string());
    config.insert("M".into(), a.m.to_string());
    let (bound, bound_name) = psi_bound(a.psi_bound);
    config.insert("psi_bound".into(), bound_name.into());

    let point = if let Some(lit) = &a.xhat {
        let xhat = parse_rational(lit)?;
        config.insert("xhat".into(), xhat.to_string());
        ScaledPoint::from_xhat(a.big_n, &r.p, xhat, prec)?
    } else if let Some(lit) = &a.v {
        let v = parse_rational(lit)?;
        config.insert("v".into(), v.to_string());
        ScaledPoint::from_v(a.big_n, &r.p, v, prec)?
    } else if let Some(lit) = &a.x {
        config.insert("x".into(), lit.trim().to_string());
        ScaledPoint::from_x(a.big_n, &r.p, parse_x(lit, prec)?, prec)?
    } else {
        return Err(domain("one of --xhat, --v, --x is required"));
    };
    let big_n_real = Float::with_val(prec.bits(), a.big_n);
    if *point.xhat() < 0 || *point.xhat() > big_n_real {
        return Err(domain(format!(
            "x̂ = {} lies outside [0, {}]",
            fmt(point.xhat()),
            a.big_n
        )));
    }

    let mut doc = Document::new("eval", config);
    let guarded = prec.guarded(32);
    let exact_xhat = point.xhat_exact();
    let k_real = match &exact_xhat {
        Some(xh) => {
            let k = krawtchouk_hypergeometric(&params, xh);
            doc.value("k", k.to_string());
            doc.value("K", krawtchouk_nonnormalized(&params, xh).to_string());
            rational_to_real(&k, guarded)
        }
        None => {
            let k = krawtchouk_real(&params, point.xhat(), guarded)?;
            let big_k = Float::with_val(
                guarded.bits(),
                &k / rational_to_real(&params.normalization(), guarded),
            );
            doc.value("k", fmt(&k));
            doc.value("K", fmt(&big_k));
            k
        }
    };
    let rho = rho_real(point.xhat(), a.big_n, &r.p, guarded)?;
    let rho_k = Float::with_val(guarded.bits(), &rho * &k_real);
    doc.value("rho", fmt(&rho));
    doc.value("rho*k", fmt(&rho_k));
    match &exact_xhat {
        Some(xh) => doc.value("xhat", xh.to_string()),
        None => doc.value("xhat", fmt(point.xhat())),
    }
    match point.v_exact() {
        Some(v) => doc.value("v", v.to_string()),
        None => doc.value("v", fmt(point.v())),
    }
    doc.value("x", fmt(point.x()));
    doc.value("H_n(x)", fmt(&hermite_real(a.n, point.x())));
    let (scaled, _) = classical_limit(a.n, a.big_n, &r.p, point.x(), prec)?;
    doc.value("(2/(Npq))^(n/2)*n!*k", fmt(&scaled));

    let t2 = Theorem2::new(a.n, a.m, &r.p, bound, prec)?.eval(a.big_n, point.x());
    let t2_res = Float::with_val(prec.bits(), &rho_k - &t2).abs();
    doc.value("hermite_expansion", fmt(&t2));
    doc.value("hermite_expansion_residual", fmt(&t2_res));
    if a.n >= 1 {
        let c1 = corollary1_eval(a.n, &r.p, a.big_n, point.v(), r.form)?;
        let c1_res = Float::with_val(prec.bits(), &k_real - &c1).abs();
        doc.value("two_term", fmt(&c1));
        doc.value("two_term_residual", fmt(&c1_res));
    }
    Ok(Outcome {
        document: doc,
        format: r.format,
        verified: true,
    })
}

pub fn expand(a: &ExpandArgs) -> Result<Outcome> {
    let r = resolve(&a.common, Format::Text)?;
    let mut config = base_config(&r);
    config.insert("n".into(), a.n.to_string());
    config.insert("terms".into(), a.terms.to_string());
    let e = symbolic_expansion(a.n, a.terms, &r.p)?;
    let mut doc = Document::new("expand", config);
    doc.value("residual", e.residual.to_string());
    doc.value("regime", e.regime.to_string());
    doc.table = Some(Table {
        columns: vec!["power", "coefficient"],
        rows: e
            .terms
            .iter()
            .map(|t| vec![format!("N^{}", t.n_power), t.coeff.display_with("v")])
            .collect(),
        labelled: true,
    });
    Ok(Outcome {
        document: doc,
        format: r.format,
        verified: true,
    })
}

fn sampling_of(a: &VerifyArgs) -> Result<Sampling> {
    Ok(if let Some(x) = &a.x {
        Sampling::FixedX(parse_rational(x)?)
    } else if let Some(v) = &a.v {
        Sampling::FixedV(parse_rational(v)?)
    } else if let Some(alpha) = a.v_power {
        if !alpha.is_finite() {
            return Err(domain("--v-power must be finite"));
        }
        Sampling::VPower(alpha)
    } else {
        match a.sampling {
            Some(SamplingArg::Uniform) => Sampling::Uniform,
            Some(SamplingArg::Lattice) => Sampling::Lattice,
            None => Sampling::Default,
        }
    })
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let r = resolve(&a.common, Format::Text)?;
    let claim: Claim = a.claim.parse()?;
    let grid = GridSpec::new(a.grid_base, a.grid_ratio, a.grid_count)?;
    let (bound, bound_name) = psi_bound(a.psi_bound);
    let sampling = sampling_of(a)?;
    let cfg = SweepConfig {
        p: r.p.clone(),
        n: a.n,
        m: a.m,
        i: a.i,
        r: a.r,
        a: parse_rational(&a.a)?,
        sampling: sampling.clone(),
        points_per_unit: a.points_per_unit,
        grid,
        big_n: a.big_n,
        prec: r.prec,
        form: r.form,
        psi_bound: bound,
        target: None,
        precision_check: !a.no_precision_check,
    };

    let mut config = base_config(&r);
    config.insert("claim".into(), claim.tag().into());
    config.insert("n".into(), a.n.to_string());
    config.insert("M".into(), a.m.to_string());
    config.insert("i".into(), a.i.to_string());
    config.insert("r".into(), a.r.to_string());
    config.insert("N".into(), a.big_n.to_string());
    config.insert("A".into(), cfg.a.to_string());
    config.insert("sampling".into(), sampling.to_string());
    config.insert("points_per_unit".into(), a.points_per_unit.to_string());
    config.insert("grid_base".into(), a.grid_base.to_string());
    config.insert("grid_ratio".into(), a.grid_ratio.to_string());
    config.insert("grid_count".into(), a.grid_count.to_string());
    config.insert("psi_bound".into(), bound_name.into());
    config.insert("precision_check".into(), cfg.precision_check.to_string());

    let mut report = uniform_sweep(claim, &cfg)?;
    report.wall_time_ms = None;
    let mut doc = Document::new("verify", config);
    doc.value("verdict", format!("{:?}", report.verdict).to_lowercase());
    doc.value("sampling", report.sampling.clone());
    doc.value("weight_exponent", report.weight_exponent.to_string());
    doc.value("fit_weighted", report.fit_weighted.to_string());
    if let Some(fit) = report.fit {
        doc.value("slope", format!("{:.6}", fit.slope));
        doc.value("std_err", format!("{:.6}", fit.std_err));
    }
    if let Some(t) = report.target {
        doc.value(
            "target",
            format!("{:?} {} ± {}", t.kind, t.slope, t.tolerance),
        );
    }
    doc.value(
        "weighted_decreasing",
        report.weighted_decreasing.to_string(),
    );
    if let Some(pc) = &report.precision_check {
        doc.value(
            "precision_check",
            format!(
                "{} bits, slope {:.6}, delta {:.2e}",
                pc.doubled_bits, pc.slope, pc.delta
            ),
        );
    }
    for note in &report.notes {
        doc.value("note", note.clone());
    }
    doc.table = Some(Table {
        columns: vec!["N", "residual", "weighted_residual", "exact"],
        rows: report
            .rows
            .iter()
            .map(|row| {
                vec![
                    row.n.to_string(),
                    row.residual.clone(),
                    row.weighted_residual.clone(),
                    row.exact.to_string(),
                ]
            })
            .collect(),
        labelled: false,
    });
    let verified = report.is_success();
    doc.json_body = Some(("report", serde_json::to_value(&report)?));
    Ok(Outcome {
        document: doc,
        format: r.format,
        verified,
    })
}

pub fn table(a: &TableArgs) -> Result<Outcome> {
    let r = resolve(&a.common, Format::Csv)?;
    let params = KrawtchoukParams::new(r.p.clone(), a.big_n, a.n)?;
    let from = a.from.unwrap_or(0);
    let to = a.to.unwrap_or(a.big_n);
    if from > to || to > a.big_n {
        return Err(domain(format!(
            "lattice range {from}..={to} must lie inside [0, {}]",
            a.big_n
        )));
    }
    let mut config = base_config(&r);
    config.insert("N".into(), a.big_n.to_string());
    config.insert("n".into(), a.n.to_string());
    config.insert("from".into(), from.to_string());
    config.insert("to".into(), to.to_string());
    let guarded = r.prec.guarded(32);
    let digits = r.prec.decimal_digits();
    let mut rows = Vec::new();
    for xh in from..=to {
        let x = Rational::from(xh);
        let rho = rho_real(&Float::with_val(guarded.bits(), xh), a.big_n, &r.p, guarded)?;
        rows.push(vec![
            xh.to_string(),
            krawtchouk_hypergeometric(&params, &x).to_string(),
            krawtchouk_nonnormalized(&params, &x).to_string(),
            format_real(&rho, digits),
        ]);
    }
    let mut doc = Document::new("table", config);
    doc.table = Some(Table {
        columns: vec!["xhat", "k", "K", "rho"],
        rows,
        labelled: false,
    });
    Ok(Outcome {
        document: doc,
        format: r.format,
        verified: true,
    })
}
