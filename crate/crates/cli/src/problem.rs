use std::path::Path;

use anyhow::{Context, Result};
use grushin_core::discretize::Grid1D;
use grushin_core::interp::Pchip;
use grushin_core::profiles::{
    potential_from_measure, validate_h2, DegeneracyProfile, H2Report, Interval, MeasureSpec, PotentialSpec, ProfileForm,
};
use grushin_core::spec_io::{
    parse_measure_arg, parse_potential_arg, parse_profile_arg, parse_table_csv, parse_zone_arg, Compact, ProfileArg,
    ProfileKv,
};
use serde_json::Value;

use crate::report::{int, num, Obj};
use crate::settings::{invalid, Invalid, Settings};

pub const H2_TOL: f64 = 1e-6;

fn load_table(path: &Path) -> Result<Pchip> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading table {}", path.display()))?;
    parse_table_csv(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())).into())
}

/// The profile, its label and the x-grid of a run.
pub struct Problem {
    pub profile: DegeneracyProfile,
    pub label: String,
    pub grid: Grid1D,
    pub potential: PotentialSpec,
    pub potential_label: String,
}

fn gamma(s: &Settings) -> Result<Option<u32>> {
    Ok(s.count("gamma")?.map(|g| g as u32))
}

pub fn load_profile(s: &Settings, default: Option<&str>) -> Result<(DegeneracyProfile, String)> {
    let l = s.real("L")?;
    let l_minus = s.real("L-minus")?.or(l);
    let l_plus = s.real("L-plus")?.or(l);
    if let Some(path) = s.get("profile-file") {
        if s.get("profile").is_some() {
            return invalid("give either --profile or --profile-file, not both");
        }
        let path = Path::new(path);
        let text = std::fs::read_to_string(path).with_context(|| format!("reading profile {}", path.display()))?;
        let mut kv = ProfileKv::parse(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
        if let Some(v) = l_minus {
            kv.l_minus = v;
        }
        if let Some(v) = l_plus {
            kv.l_plus = v;
        }
        if let Some(g) = gamma(s)? {
            kv.gamma = Some(g);
        }
        let table = match &kv.table {
            Some(t) => Some(load_table(&path.parent().unwrap_or(Path::new(".")).join(t))?),
            None => None,
        };
        let p = kv.build(table)?;
        return Ok((p, format!("file:{}", path.display())));
    }
    let spec = match s.get("profile").or(default) {
        Some(v) => v,
        None => return invalid("missing required option --profile"),
    };
    let arg = parse_profile_arg(spec)?;
    let (table, lm, lp) = match &arg {
        ProfileArg::Table(path) => {
            let t = load_table(Path::new(path))?;
            let (lo, hi) = t.range();
            (Some(t), l_minus.unwrap_or(-lo), l_plus.unwrap_or(hi))
        }
        _ => (None, l_minus.unwrap_or(1.0), l_plus.unwrap_or(1.0)),
    };
    let p = arg.build(lm, lp, gamma(s)?, table)?;
    Ok((p, spec.to_string()))
}

pub fn profile_json(p: &DegeneracyProfile, label: &str) -> Value {
    let form = match p.form() {
        ProfileForm::Monomial { .. } => "monomial",
        ProfileForm::Polynomial(_) => "polynomial",
        ProfileForm::Tangent => "tangent",
        ProfileForm::Tabulated(_) => "tabulated",
    };
    Obj::new()
        .set("spec", label)
        .set("form", form)
        .set("gamma", p.gamma())
        .real("L_minus", p.l_minus())
        .real("L_plus", p.l_plus())
        .build()
}

pub fn grid_json(g: &Grid1D) -> Value {
    Obj::new().real("a", g.a()).real("b", g.b()).set("n", int(g.len())).build()
}

pub fn h2_json(r: &H2Report) -> Value {
    Obj::new()
        .set("pass", r.pass)
        .set("gamma", r.gamma)
        .real("step", r.step)
        .set("derivative_estimates", crate::report::nums(&r.derivative_estimates))
        .real("min_abs_q", r.min_abs_q)
        .real("excluded_radius", r.excluded_radius)
        .set("sign_change", r.sign_change)
        .set("failures", r.failures.clone())
        .build()
}

/// Fail with exit code 2 unless the profile hypotheses hold or are skipped.
pub fn check_h2(s: &Settings, p: &DegeneracyProfile) -> Result<()> {
    if s.flag("skip-h2")? {
        return Ok(());
    }
    let r = validate_h2(p, H2_TOL)?;
    if !r.pass {
        return invalid(format!(
            "profile fails the hypotheses (use --skip-h2 to override): {}",
            r.failures.join("; ")
        ));
    }
    Ok(())
}

fn potential(s: &Settings, grid: &Grid1D) -> Result<(PotentialSpec, String)> {
    match (s.get("potential"), s.get("measure")) {
        (Some(_), Some(_)) => invalid("give either --potential or --measure, not both"),
        (Some(v), None) => {
            let p = match parse_potential_arg(v)? {
                Compact::Ready(p) => p,
                Compact::Table(path) => PotentialSpec::Tabulated(load_table(Path::new(&path))?),
            };
            Ok((p, v.to_string()))
        }
        (None, Some(m)) => {
            let h = match parse_measure_arg(m)? {
                Compact::Ready(h) => h,
                Compact::Table(path) => MeasureSpec::Tabulated(load_table(Path::new(&path))?),
            };
            Ok((potential_from_measure(&h, grid)?, format!("measure:{m}")))
        }
        (None, None) => Ok((PotentialSpec::Zero, "0".to_string())),
    }
}

pub fn load(s: &Settings, default_profile: Option<&str>, default_n: usize) -> Result<Problem> {
    let (profile, label) = load_profile(s, default_profile)?;
    check_h2(s, &profile)?;
    let (lo, hi) = profile.domain();
    let grid = Grid1D::dirichlet(lo, hi, s.count_or("n", default_n)?)?;
    let (potential, potential_label) = potential(s, &grid)?;
    Ok(Problem {
        profile,
        label,
        grid,
        potential,
        potential_label,
    })
}

pub fn zone(s: &Settings) -> Result<Vec<Interval>> {
    let z = s.require("zone")?;
    parse_zone_arg(z).map_err(|e| Invalid(format!("--zone: {e}")).into())
}

pub fn zone_json(intervals: &[Interval]) -> Value {
    Value::Array(
        intervals
            .iter()
            .map(|i| Value::Array(vec![num(i.lo), num(i.hi)]))
            .collect(),
    )
}
