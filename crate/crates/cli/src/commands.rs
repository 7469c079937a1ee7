use std::f64::consts::PI;

use anyhow::Result;
use grushin_core::classical::{check_dominance, classical_mu, write_classical_csv};
use grushin_core::controllability::{
    assemble_report, frequency_localized_sweep, observe_frequency, runge_counterexample, tail_increasing, zone_mass,
    ControlZone, MinimalTime, ObservabilityReport, PolynomialTestCase, RatioRow, DEFAULT_STAGES,
};
use grushin_core::discretize::{assemble_x_operator, Grid1D};
use grushin_core::eigensolve::eigenvalue_k;
use grushin_core::generalized::{asymptotic_rate_fit, generalized_lambda, write_generalized_csv};
use grushin_core::heat::{evolve_and_compare, CgSettings};
use grushin_core::profiles::{
    agmon_distance, agmon_set_distance, bump_pair, sublevel_set_fdelta, validate_h2, AgmonMetric,
};
use grushin_core::spec_io::{parse_real_list, parse_weight_arg};
use rayon::prelude::*;
use serde_json::Value;

use crate::problem::{self, grid_json, h2_json, profile_json, zone_json, H2_TOL};
use crate::report::{cell, int, num, nums, Obj, OutDir, TOOL_VERSION};
use crate::settings::{invalid, Invalid, Settings};

const DEFAULT_N: usize = 4097;

fn header(command: &str, p: &problem::Problem) -> Obj {
    Obj::new()
        .set("command", command)
        .set("tool_version", TOOL_VERSION)
        .set("profile", profile_json(&p.profile, &p.label))
        .set("potential", p.potential_label.clone())
        .set("grid", grid_json(&p.grid))
}

pub fn spectrum(s: &Settings, out: &OutDir) -> Result<String> {
    let p = problem::load(s, None, DEFAULT_N)?;
    let xis = s.sorted_list("xi")?;
    let count = s.count_or("count", 5)?;
    if count == 0 || count > p.grid.len() {
        return invalid(format!("--count must lie in 1..={}", p.grid.len()));
    }
    let rows = xis
        .par_iter()
        .map(|&xi| -> Result<(f64, f64, Vec<f64>)> {
            let op = assemble_x_operator(&p.grid, &p.profile, xi, &p.potential, false)?;
            let values = (1..=count).map(|k| eigenvalue_k(&op, k, 1e-10)).collect::<Result<Vec<_>, _>>()?;
            let mu = classical_mu(&p.profile, xi, &p.grid)?.mu;
            Ok((xi, mu, values))
        })
        .collect::<Result<Vec<_>>>()?;
    out.with_file("spectrum.csv", |w| {
        writeln!(w, "xi,k,lambda")?;
        for (xi, _, values) in &rows {
            for (k, v) in values.iter().enumerate() {
                writeln!(w, "{},{},{}", cell(*xi), k + 1, cell(*v))?;
            }
        }
        Ok(())
    })?;
    if s.flag("export-operator")? {
        let op = assemble_x_operator(&p.grid, &p.profile, xis[0], &p.potential, false)?;
        out.with_file("operator.csv", |w| op.write_csv(w))?;
    }
    let json = header("spectrum", &p)
        .set(
            "rows",
            Value::Array(
                rows.iter()
                    .map(|(xi, mu, v)| Obj::new().real("xi", *xi).real("mu_classical", *mu).set("eigenvalues", nums(v)).build())
                    .collect(),
            ),
        )
        .build();
    out.json("spectrum.json", &json)?;
    Ok(format!("spectrum: {} frequencies, {} eigenvalues each", rows.len(), count))
}

pub fn asymptotics(s: &Settings, out: &OutDir) -> Result<String> {
    let p = problem::load(s, None, DEFAULT_N)?;
    let xis = s.sorted_list("xi")?;
    let sweep = xis
        .par_iter()
        .map(|&xi| generalized_lambda(&p.profile, xi, &p.potential, &p.grid))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma = p.profile.gamma();
    let fit = asymptotic_rate_fit(&sweep, gamma)?;
    out.with_file("asymptotics.csv", |w| write_generalized_csv(&sweep, w))?;
    let classical: Vec<_> = sweep.iter().map(|d| d.classical.clone()).collect();
    out.with_file("classical.csv", |w| write_classical_csv(&classical, w))?;
    let pick = |f: &dyn Fn(&grushin_core::generalized::GeneralizedGroundData) -> f64| -> Vec<f64> {
        sweep.iter().map(f).collect()
    };
    let json = header("asymptotics", &p)
        .set("gamma", gamma)
        .set("frequencies", nums(&xis))
        .set("lambdas", nums(&pick(&|d| d.lambda)))
        .set("mu", nums(&pick(&|d| d.mu_ref)))
        .set("gap", nums(&pick(&|d| d.gap)))
        .set("certificate", nums(&pick(&|d| d.certificate)))
        .set("indices", Value::Array(sweep.iter().map(|d| int(d.index)).collect()))
        .real("exponent", fit.exponent)
        .real("expected_exponent", 2.0 / (gamma as f64 + 1.0))
        .real("coefficient", fit.coefficient)
        .set("fit_residuals", nums(&fit.residuals))
        .set("lambda_over_xi", fit.lambda_over_xi.map_or(Value::Null, num))
        .build();
    out.json("asymptotics.json", &json)?;
    Ok(format!("asymptotics: exponent {:.6} (expected {:.6})", fit.exponent, 2.0 / (gamma as f64 + 1.0)))
}

pub fn agmon(s: &Settings, out: &OutDir) -> Result<String> {
    let p = problem::load(s, None, DEFAULT_N)?;
    let delta = s.real_or("delta", 0.0)?;
    let metric = AgmonMetric::new(p.profile.clone(), delta, AgmonMetric::DEFAULT_RESOLUTION)?;
    let samples = s.count_or("samples", 201)?;
    if samples < 2 {
        return invalid("--samples must be at least 2");
    }
    let (lo, hi) = p.profile.domain();
    let xs: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
    let ds = xs
        .par_iter()
        .map(|&x| agmon_distance(&metric, x))
        .collect::<Result<Vec<_>, _>>()?;
    out.with_file("agmon.csv", |w| {
        writeln!(w, "x,d_agm")?;
        for (x, d) in xs.iter().zip(&ds) {
            writeln!(w, "{},{}", cell(*x), cell(*d))?;
        }
        Ok(())
    })?;
    let mut json = header("agmon", &p).real("delta", delta);
    let fdelta = if delta > 0.0 {
        let f = sublevel_set_fdelta(&p.profile, delta, &p.grid)?;
        json = json.set(
            "sublevel_set",
            Obj::new()
                .real("lo", f.interval.lo)
                .real("hi", f.interval.hi)
                .set("connected", f.connected)
                .set("touches_boundary", f.touches_boundary)
                .build(),
        );
        f.interval
    } else {
        grushin_core::profiles::Interval::point(0.0)
    };
    let mut summary = format!("agmon: {} samples", samples);
    if s.get("zone").is_some() {
        let zone = problem::zone(s)?;
        let d = agmon_set_distance(&metric, &zone, &fdelta)?;
        json = json
            .set("zone", zone_json(&zone))
            .real("zone_distance", d.distance)
            .set("zone_overlaps", d.overlap);
        summary = format!("agmon: distance to zone {:.6}", d.distance);
    }
    json = json.set("x", nums(&xs)).set("d_agm", nums(&ds));
    out.json("agmon.json", &json.build())?;
    Ok(summary)
}

fn control_zone(s: &Settings) -> Result<(ControlZone, Vec<grushin_core::profiles::Interval>)> {
    let intervals = problem::zone(s)?;
    Ok((ControlZone::vertical(intervals.clone())?, intervals))
}

pub fn decay(s: &Settings, out: &OutDir) -> Result<String> {
    let p = problem::load(s, None, DEFAULT_N)?;
    let xis = s.sorted_list("xi")?;
    let (zone, intervals) = control_zone(s)?;
    zone.check_inside(p.grid.a(), p.grid.b())?;
    let rows = xis
        .par_iter()
        .map(|&xi| -> Result<(f64, f64, f64, bool)> {
            let d = generalized_lambda(&p.profile, xi, &p.potential, &p.grid)?;
            let m = zone_mass(&d.eigen, &zone, &p.grid)?;
            let dom = check_dominance(&d.classical)?;
            Ok((xi, d.lambda, m.log_mass, dom.holds))
        })
        .collect::<Result<Vec<_>>>()?;
    let metric = AgmonMetric::plain(p.profile.clone());
    let nearest = intervals
        .iter()
        .map(|i| if i.lo > 0.0 { i.lo } else if i.hi < 0.0 { i.hi } else { 0.0 })
        .map(|x| agmon_distance(&metric, x))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let betas: Vec<f64> = rows.iter().map(|r| -r.2 / (2.0 * r.0)).collect();
    out.with_file("decay.csv", |w| {
        writeln!(w, "xi,lambda,log_mass,beta,dominance")?;
        for (r, b) in rows.iter().zip(&betas) {
            writeln!(w, "{},{},{},{},{}", cell(r.0), cell(r.1), cell(r.2), cell(*b), r.3)?;
        }
        Ok(())
    })?;
    let json = header("decay", &p)
        .set("zone", zone_json(&intervals))
        .real("agmon_distance", nearest)
        .set("frequencies", nums(&xis))
        .set("lambdas", nums(&rows.iter().map(|r| r.1).collect::<Vec<_>>()))
        .set("log_masses", nums(&rows.iter().map(|r| r.2).collect::<Vec<_>>()))
        .set("beta", nums(&betas))
        .set("dominance", rows.iter().map(|r| r.3).collect::<Vec<_>>())
        .build();
    out.json("decay.json", &json)?;
    Ok(format!(
        "decay: beta at xi = {} is {:.6} (Agmon distance {:.6})",
        xis[xis.len() - 1],
        betas[betas.len() - 1],
        nearest
    ))
}

fn write_ratios(out: &OutDir, name: &str, rows: &[RatioRow]) -> Result<()> {
    out.with_file(name, |w| {
        writeln!(w, "T,xi,log_ratio")?;
        for r in rows {
            writeln!(w, "{},{},{}", cell(r.t), cell(r.xi), cell(r.log_ratio))?;
        }
        Ok(())
    })?;
    Ok(())
}

fn observability_json(p: &problem::Problem, intervals: &[grushin_core::profiles::Interval], r: &ObservabilityReport) -> Obj {
    let t_lower = match r.t_lower {
        MinimalTime::Finite(t) => num(t),
        MinimalTime::Unbounded => Value::from("unbounded"),
    };
    Obj::new()
        .set("profile", profile_json(&p.profile, &p.label))
        .set("zone", zone_json(intervals))
        .set("gamma", r.gamma)
        .real("s", r.s)
        .set("frequencies", nums(&r.frequencies))
        .set("lambdas", nums(&r.lambdas))
        .set("masses", nums(&r.masses))
        .set("log_masses", nums(&r.log_masses))
        .real("alpha_hat", r.alpha_hat)
        .real("beta_hat", r.beta_hat)
        .set("T_lower", t_lower)
        .set(
            "fit_residuals",
            Obj::new().set("alpha", nums(&r.alpha_residuals)).set("beta", nums(&r.beta_residuals)).build(),
        )
        .real("lambda_exponent", r.lambda_exponent)
        .set(
            "tail_increasing",
            Value::Array(
                r.tail_increasing
                    .iter()
                    .map(|(t, inc)| Obj::new().real("T", *t).set("increasing", *inc).build())
                    .collect(),
            ),
        )
        .set("potential", p.potential_label.clone())
        .set("grid", grid_json(&p.grid))
        .set("tool_version", TOOL_VERSION)
}

pub fn minimal_time(s: &Settings, out: &OutDir) -> Result<String> {
    let p = problem::load(s, None, DEFAULT_N)?;
    let xis = s.sorted_list("xi")?;
    let ts = s.sorted_list_or("T", "0.1")?;
    let sobolev = s.real_or("s", 0.5)?;
    let (zone, intervals) = control_zone(s)?;
    if zone.distance_to_singularity() <= 0.0 {
        return invalid("the control zone must stay away from x = 0");
    }
    let (report, localized) = match s.real("localized-delta")? {
        Some(delta) => {
            let nodes = s.count_or("nodes", 16)?;
            let l = frequency_localized_sweep(&p.profile, &p.potential, &zone, &xis, delta, nodes, &ts, sobolev, &p.grid)?;
            (l.report, Some((l.localized, delta, nodes)))
        }
        None => {
            let points = xis
                .par_iter()
                .map(|&xi| observe_frequency(&p.profile, &p.potential, &zone, xi, &p.grid))
                .collect::<Result<Vec<_>, _>>()?;
            (assemble_report(points, p.profile.gamma(), &ts, sobolev)?, None)
        }
    };
    write_ratios(out, "ratios.csv", &report.ratios)?;
    let mut json = observability_json(&p, &intervals, &report).set("command", "minimal-time");
    if let Some((rows, delta, nodes)) = &localized {
        write_ratios(out, "localized.csv", rows)?;
        json = json.real("localized_delta", *delta).set("localized_nodes", int(*nodes));
    }
    out.json("minimal-time.json", &json.build())?;
    Ok(match report.t_lower {
        MinimalTime::Finite(t) => format!("minimal-time: T_lower = {t:.6}"),
        MinimalTime::Unbounded => "minimal-time: unbounded".to_string(),
    })
}

fn mode(s: &Settings) -> Result<(usize, usize)> {
    let v = s.get("mode").unwrap_or("1,8");
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [k, n] => match (k.parse::<usize>(), n.parse::<usize>()) {
            (Ok(k), Ok(n)) if k > 0 && n > 0 => Ok((k, n)),
            _ => invalid(format!("--mode: expected two positive integers k,n, got {v:?}")),
        },
        _ => invalid(format!("--mode: expected k,n, got {v:?}")),
    }
}

pub fn simulate(s: &Settings, out: &OutDir) -> Result<String> {
    let p = problem::load(s, Some("monomial:1"), 257)?;
    let ny = s.count_or("ny", 129)?;
    let gy = Grid1D::dirichlet(0.0, s.real_or("y-max", PI)?, ny)?;
    let weight = parse_weight_arg(s.get("weight").unwrap_or("one"))?;
    weight.validate_on(&gy)?;
    let mode = mode(s)?;
    let t = s.real_or("T", 0.1)?;
    let dt = s.real_or("dt", 1e-4)?;
    let settings = CgSettings {
        rel_tol: s.real_or("cg-tol", 1e-10)?,
        max_iter: None,
    };
    let c = evolve_and_compare(&p.profile, &p.potential, &weight, &p.grid, &gy, mode, t, dt, &settings)?;
    let traj = &c.trajectory;
    let n0 = traj.norms[0];
    out.with_file("norms.csv", |w| {
        writeln!(w, "t,norm,predicted")?;
        for ((t, n), e) in traj.times.iter().zip(&traj.norms).zip(&c.predicted) {
            writeln!(w, "{},{},{}", cell(*t), cell(*n), cell(n0 * e))?;
        }
        Ok(())
    })?;
    if s.flag("snapshot")? {
        out.with_file("snapshot.csv", |w| traj.field.write_csv(w))?;
    }
    let json = header("simulate", &p)
        .set("grid_y", grid_json(&gy))
        .set("mode", vec![mode.0, mode.1])
        .real("xi", c.xi)
        .real("lambda", c.lambda)
        .real("T", t)
        .real("dt", dt)
        .set("steps", int(c.steps))
        .real("max_rel_error", c.max_rel_error)
        .real("rank_one_defect", c.rank_one_defect)
        .set("max_cg_iterations", int(traj.max_cg_iterations))
        .set("norm_violation", traj.norm_violation.map_or(Value::Null, int))
        .build();
    out.json("simulate.json", &json)?;
    Ok(format!("simulate: max relative error {:.3e} over {} steps", c.max_rel_error, c.steps))
}

fn arc(s: &Settings) -> Result<(f64, f64)> {
    match s.get("arc") {
        None => Ok((PI / 4.0, 3.0 * PI / 4.0)),
        Some(v) => match v.split_once(':') {
            Some((lo, hi)) => {
                let lo = grushin_core::spec_io::parse_real(lo).map_err(|e| Invalid(format!("--arc: {e}")))?;
                let hi = grushin_core::spec_io::parse_real(hi).map_err(|e| Invalid(format!("--arc: {e}")))?;
                Ok((lo, hi))
            }
            None => invalid(format!("--arc: expected lo:hi, got {v:?}")),
        },
    }
}

pub fn counterexample(s: &Settings, out: &OutDir) -> Result<String> {
    let (profile, label) = problem::load_profile(s, Some("monomial:1"))?;
    problem::check_h2(s, &profile)?;
    let stages: Vec<usize> = match s.get("stages") {
        None => DEFAULT_STAGES.to_vec(),
        Some(v) => parse_real_list(v)
            .map_err(|e| Invalid(format!("--stages: {e}")))?
            .into_iter()
            .map(|d| if d >= 1.0 && d.fract() == 0.0 { Ok(d as usize) } else { invalid(format!("--stages: bad degree {d}")) })
            .collect::<Result<_>>()?,
    };
    let case = PolynomialTestCase::new(
        &profile,
        s.real_or("a", 0.5)?,
        s.real_or("b", 0.5)?,
        s.real_or("epsilon", 0.1)?,
        s.real_or("T", 0.05)?,
        s.count_or("order", 2)?,
        arc(s)?,
    )?;
    let rep = runge_counterexample(&case, &stages, s.count_or("samples", 4096)?)?;
    out.with_file("koenig-demo.csv", |w| {
        writeln!(w, "degree,lhs,rhs,ratio,fit_error")?;
        for st in &rep.stages {
            writeln!(w, "{},{},{},{},{}", st.degree, cell(st.lhs), cell(st.rhs), cell(st.ratio), cell(st.fit_error))?;
        }
        Ok(())
    })?;
    let ratios = rep.ratios();
    let json = Obj::new()
        .set("command", "koenig-demo")
        .set("tool_version", TOOL_VERSION)
        .set("profile", profile_json(&profile, &label))
        .real("a", case.a)
        .real("b", case.b)
        .real("epsilon", case.epsilon)
        .real("T", case.t)
        .real("threshold", case.threshold())
        .set("order", int(case.n_order))
        .set("arc", nums(&[case.arc.0, case.arc.1]))
        .real("r0", case.r0)
        .real("r1", case.r1)
        .set("z0", nums(&[case.z0.re, case.z0.im]))
        .set(
            "stages",
            Value::Array(
                rep.stages
                    .iter()
                    .map(|st| {
                        Obj::new()
                            .set("degree", int(st.degree))
                            .real("lhs", st.lhs)
                            .real("rhs", st.rhs)
                            .real("ratio", st.ratio)
                            .real("fit_error", st.fit_error)
                            .build()
                    })
                    .collect(),
            ),
        )
        .real("growth", rep.growth())
        .set("tail_increasing", tail_increasing(&ratios))
        .build();
    out.json("koenig-demo.json", &json)?;
    Ok(format!("koenig-demo: ratio growth {:.3e}", rep.growth()))
}

pub fn bump_check(s: &Settings, out: &OutDir) -> Result<String> {
    let r = s.real_or("R", 1.0)?;
    let delta = s.real_or("delta", 0.5)?;
    let n = s.count_or("n", 10_000)?;
    let grid = Grid1D::dirichlet(-1.1 * r.abs(), 1.1 * r.abs(), n)?;
    let b = bump_pair(r, delta, &grid)?;
    out.with_file("bump-check.csv", |w| {
        writeln!(w, "x,chi1,chi2,residual")?;
        for ((x, c1), c2) in b.nodes.iter().zip(&b.chi1).zip(&b.chi2) {
            writeln!(w, "{},{},{},{}", cell(*x), cell(*c1), cell(*c2), cell(c1 * c1 + c2 * c2 - 1.0))?;
        }
        Ok(())
    })?;
    let json = Obj::new()
        .set("command", "bump-check")
        .set("tool_version", TOOL_VERSION)
        .real("R", r)
        .real("delta", delta)
        .set("n", int(n))
        .real("max_partition_residual", b.partition_defect())
        .real("sup_dchi1", b.sup_dchi1)
        .real("sup_dchi2", b.sup_dchi2)
        .real("derivative_constant", b.derivative_constant())
        .build();
    out.json("bump-check.json", &json)?;
    Ok(format!("bump-check: max partition residual {:.3e}", b.partition_defect()))
}

pub fn validate(s: &Settings, out: &OutDir) -> Result<String> {
    let (profile, label) = problem::load_profile(s, None)?;
    let tol = s.real_or("tol", H2_TOL)?;
    let report = validate_h2(&profile, tol)?;
    let mut json = Obj::new()
        .set("command", "validate")
        .set("tool_version", TOOL_VERSION)
        .set("profile", profile_json(&profile, &label))
        .real("tol", tol)
        .set("h2", h2_json(&report));
    let mut problems = report.failures.clone();
    if s.get("potential").is_some() || s.get("measure").is_some() {
        let (lo, hi) = profile.domain();
        let grid = Grid1D::dirichlet(lo, hi, s.count_or("n", 1025)?)?;
        match problem::load(&s.without_h2(), None, grid.len()) {
            Ok(p) => {
                let sup = p.potential.sup_norm(lo, hi);
                json = json.real("potential_sup_norm", sup);
                if !sup.is_finite() {
                    problems.push("potential is not bounded on the domain".into());
                }
            }
            Err(e) => problems.push(format!("{e:#}")),
        }
    }
    json = json.set("pass", problems.is_empty());
    out.json("validate.json", &json.build())?;
    if !problems.is_empty() {
        let residuals: Vec<String> = report
            .derivative_estimates
            .iter()
            .enumerate()
            .map(|(k, d)| format!("q^({k})(0) = {d:.6e}"))
            .collect();
        return invalid(format!("validation failed: {} [{}]", problems.join("; "), residuals.join(", ")));
    }
    Ok(format!("validate: {} passes", label))
}
