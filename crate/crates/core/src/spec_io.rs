//! Text formats: flat `key = value` specs, two-column CSV tables and the
//! compact argument strings of the command line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::profiles::{DegeneracyProfile, Interval, MeasureSpec, PotentialSpec, ProfileForm, WeightSpec};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Flat `key = value` text. `#` starts a comment; keys may not repeat.
/// Values remember the line they came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected key = value, got {body:?}")))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(parse_err(line, format!("invalid key {key:?}")));
            }
            if entries.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
                return Err(parse_err(line, format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(l, _)| *l)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fail on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, (line, _)) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(parse_err(*line, format!("unknown key {k:?}")));
            }
        }
        Ok(())
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| parse_err(0, format!("missing key {key:?}")))
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_real(v).map_err(|e| at_line(e, self.line_of(key))))
            .transpose()
    }

    pub fn unsigned(&self, key: &str) -> Result<Option<u32>> {
        self.get(key)
            .map(|v| {
                v.parse::<u32>()
                    .map_err(|_| parse_err(self.line_of(key), format!("{key}: expected a nonnegative integer, got {v:?}")))
            })
            .transpose()
    }

    pub fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| parse_real_list(v).map_err(|e| at_line(e, self.line_of(key))))
            .transpose()
    }
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { msg, .. } => Error::Parse { line, msg },
        other => other,
    }
}

/// A finite real number.
pub fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(0, format!("expected a number, got {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(0, format!("expected a finite number, got {s:?}")));
    }
    Ok(v)
}

/// Comma-separated finite reals, at least one.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Err(parse_err(0, "empty list"));
    }
    s.split(',').map(parse_real).collect()
}

/// Comma-separated list that must be strictly increasing.
pub fn parse_sorted_list(s: &str) -> Result<Vec<f64>> {
    let v = parse_real_list(s)?;
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(parse_err(0, format!("list {s:?} must be strictly increasing")));
    }
    Ok(v)
}

/// Two-column `x, value` CSV. A non-numeric first row is taken as a header;
/// `#` lines are comments.
pub fn parse_table_csv(text: &str) -> Result<Pchip> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(parse_err(line, format!("expected 2 columns, got {}", rec.len())));
        }
        match (parse_real(&rec[0]), parse_real(&rec[1])) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if k == 0 => continue,
            _ => return Err(parse_err(line, format!("non-numeric row {:?},{:?}", &rec[0], &rec[1]))),
        }
    }
    if xs.len() < 2 {
        return Err(parse_err(0, "a table needs at least two rows"));
    }
    if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
        return Err(parse_err(i + 2, "x values must be strictly increasing"));
    }
    Pchip::new(xs, ys)
}

/// Serialize a table in the format read by [`parse_table_csv`].
pub fn write_table_csv(table: &Pchip) -> String {
    let mut s = String::from("x,value\n");
    for (x, y) in table.xs().iter().zip(table.ys()) {
        let _ = writeln!(s, "{:.16e},{:.16e}", x, y);
    }
    s
}

/// Parsed profile spec; a tabulated form carries the table reference, to be
/// resolved by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileKv {
    pub form: String,
    pub gamma: Option<u32>,
    pub power: Option<u32>,
    pub coeffs: Option<Vec<f64>>,
    pub l_minus: f64,
    pub l_plus: f64,
    pub delta: Option<f64>,
    pub table: Option<String>,
}

pub const PROFILE_KEYS: [&str; 8] = ["form", "gamma", "power", "coeffs", "L_minus", "L_plus", "delta", "table"];

impl ProfileKv {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        kv.check_keys(&PROFILE_KEYS)?;
        let form = kv.required("form")?.to_string();
        if !["monomial", "polynomial", "tangent", "tabulated"].contains(&form.as_str()) {
            return Err(parse_err(kv.line_of("form"), format!("unknown profile form {form:?}")));
        }
        let spec = Self {
            gamma: kv.unsigned("gamma")?,
            power: kv.unsigned("power")?,
            coeffs: kv.reals("coeffs")?,
            l_minus: kv.real("L_minus")?.ok_or_else(|| parse_err(0, "missing key \"L_minus\""))?,
            l_plus: kv.real("L_plus")?.ok_or_else(|| parse_err(0, "missing key \"L_plus\""))?,
            delta: kv.real("delta")?,
            table: kv.get("table").map(str::to_string),
            form,
        };
        if spec.form == "tabulated" && spec.table.is_none() {
            return Err(parse_err(0, "tabulated profile needs a \"table\" key"));
        }
        if spec.form == "polynomial" && spec.coeffs.is_none() {
            return Err(parse_err(0, "polynomial profile needs a \"coeffs\" key"));
        }
        Ok(spec)
    }

    /// Build the profile; `table` must be given for the tabulated form.
    pub fn build(&self, table: Option<Pchip>) -> Result<DegeneracyProfile> {
        let p = match self.form.as_str() {
            "monomial" => {
                let power = self.power.or(self.gamma).unwrap_or(1);
                DegeneracyProfile::monomial(power, self.l_minus, self.l_plus)?
            }
            "polynomial" => {
                let coeffs = self.coeffs.clone().unwrap_or_default();
                let gamma = match self.gamma {
                    Some(g) => g,
                    None => leading_order(&coeffs)?,
                };
                DegeneracyProfile::polynomial(coeffs, gamma, self.l_minus, self.l_plus)?
            }
            "tangent" => DegeneracyProfile::tangent(self.l_minus, self.l_plus)?,
            "tabulated" => {
                let table = table.ok_or_else(|| Error::invalid("tabulated profile needs its table"))?;
                DegeneracyProfile::tabulated(table, self.gamma.unwrap_or(1))?.with_domain(self.l_minus, self.l_plus)?
            }
            other => return Err(parse_err(0, format!("unknown profile form {other:?}"))),
        };
        match self.gamma {
            Some(g) if g != p.gamma() => p.with_gamma(g),
            _ => Ok(p),
        }
    }
}

/// Index of the first nonzero coefficient.
fn leading_order(coeffs: &[f64]) -> Result<u32> {
    coeffs
        .iter()
        .position(|c| *c != 0.0)
        .map(|i| i as u32)
        .filter(|&i| i > 0)
        .ok_or_else(|| Error::invalid("cannot infer gamma: q must vanish at 0 and not be identically zero"))
}

/// Serialize a non-tabulated profile as flat key-value text.
pub fn profile_to_kv(profile: &DegeneracyProfile, delta: Option<f64>) -> Result<String> {
    let mut s = String::new();
    match profile.form() {
        ProfileForm::Monomial { power } => {
            let _ = writeln!(s, "form = monomial\npower = {power}");
        }
        ProfileForm::Polynomial(c) => {
            let list: Vec<String> = c.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "form = polynomial\ncoeffs = {}", list.join(","));
        }
        ProfileForm::Tangent => s.push_str("form = tangent\n"),
        ProfileForm::Tabulated(_) => return Err(Error::invalid("tabulated profiles are stored with their CSV table")),
    }
    let _ = writeln!(s, "gamma = {}", profile.gamma());
    let _ = writeln!(s, "L_minus = {:e}\nL_plus = {:e}", profile.l_minus(), profile.l_plus());
    if let Some(d) = delta {
        let _ = writeln!(s, "delta = {d:e}");
    }
    Ok(s)
}

/// A compact argument that may refer to a table file.
#[derive(Debug, Clone, PartialEq)]
pub enum Compact<T> {
    Ready(T),
    Table(String),
}

fn table_ref(s: &str) -> Option<String> {
    s.strip_prefix("table:").filter(|p| !p.is_empty()).map(str::to_string)
}

/// Compact profile form as given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileArg {
    Monomial(u32),
    Polynomial(Vec<f64>),
    Tangent,
    Table(String),
}

/// `monomial:P`, `poly:c0,c1,...`, `tan` or `table:PATH`.
pub fn parse_profile_arg(s: &str) -> Result<ProfileArg> {
    let s = s.trim();
    if let Some(p) = table_ref(s) {
        return Ok(ProfileArg::Table(p));
    }
    if s == "tan" || s == "tangent" {
        return Ok(ProfileArg::Tangent);
    }
    if let Some(p) = s.strip_prefix("monomial:") {
        let power: u32 = p
            .trim()
            .parse()
            .map_err(|_| parse_err(0, format!("monomial power must be a positive integer, got {p:?}")))?;
        if power == 0 {
            return Err(parse_err(0, "monomial power must be positive"));
        }
        return Ok(ProfileArg::Monomial(power));
    }
    if let Some(c) = s.strip_prefix("poly:").or_else(|| s.strip_prefix("polynomial:")) {
        return Ok(ProfileArg::Polynomial(parse_real_list(c)?));
    }
    Err(parse_err(0, format!("unknown profile {s:?}; expected monomial:P, poly:COEFFS, tan or table:PATH")))
}

impl ProfileArg {
    /// Build on `(-l_minus, l_plus)`; `gamma` overrides the declared order.
    pub fn build(&self, l_minus: f64, l_plus: f64, gamma: Option<u32>, table: Option<Pchip>) -> Result<DegeneracyProfile> {
        let kv = ProfileKv {
            form: match self {
                ProfileArg::Monomial(_) => "monomial",
                ProfileArg::Polynomial(_) => "polynomial",
                ProfileArg::Tangent => "tangent",
                ProfileArg::Table(_) => "tabulated",
            }
            .to_string(),
            gamma,
            power: match self {
                ProfileArg::Monomial(p) => Some(*p),
                _ => None,
            },
            coeffs: match self {
                ProfileArg::Polynomial(c) => Some(c.clone()),
                _ => None,
            },
            l_minus,
            l_plus,
            delta: None,
            table: match self {
                ProfileArg::Table(p) => Some(p.clone()),
                _ => None,
            },
        };
        kv.build(table)
    }
}

/// `0`, `const:C`, `poly:c0,c1,...` or `table:PATH`.
pub fn parse_potential_arg(s: &str) -> Result<Compact<PotentialSpec>> {
    let s = s.trim();
    if let Some(p) = table_ref(s) {
        return Ok(Compact::Table(p));
    }
    if s == "0" || s == "zero" {
        return Ok(Compact::Ready(PotentialSpec::Zero));
    }
    if let Some(c) = s.strip_prefix("const:") {
        return Ok(Compact::Ready(PotentialSpec::Constant(parse_real(c)?)));
    }
    if let Some(c) = s.strip_prefix("poly:") {
        return Ok(Compact::Ready(PotentialSpec::Polynomial(parse_real_list(c)?)));
    }
    Err(parse_err(0, format!("unknown potential {s:?}; expected 0, const:C, poly:COEFFS or table:PATH")))
}

/// `one`, `exp:A`, `cos` or `table:PATH`.
pub fn parse_measure_arg(s: &str) -> Result<Compact<MeasureSpec>> {
    let s = s.trim();
    if let Some(p) = table_ref(s) {
        return Ok(Compact::Table(p));
    }
    match s {
        "one" | "1" => return Ok(Compact::Ready(MeasureSpec::One)),
        "cos" => return Ok(Compact::Ready(MeasureSpec::Cosine)),
        _ => {}
    }
    if let Some(a) = s.strip_prefix("exp:") {
        return Ok(Compact::Ready(MeasureSpec::Exponential(parse_real(a)?)));
    }
    Err(parse_err(0, format!("unknown measure {s:?}; expected one, exp:A, cos or table:PATH")))
}

/// `one`, `const:C` or `poly:c0,c1,...` with the default positivity floor.
pub fn parse_weight_arg(s: &str) -> Result<WeightSpec> {
    let s = s.trim();
    if s == "one" || s == "1" {
        return Ok(WeightSpec::one());
    }
    if let Some(c) = s.strip_prefix("const:") {
        return WeightSpec::constant(parse_real(c)?);
    }
    if let Some(c) = s.strip_prefix("poly:") {
        return WeightSpec::polynomial(parse_real_list(c)?, WeightSpec::DEFAULT_FLOOR);
    }
    Err(parse_err(0, format!("unknown weight {s:?}; expected one, const:C or poly:COEFFS")))
}

/// `lo:hi[,lo:hi...]`; intervals must be nonempty and disjoint.
pub fn parse_zone_arg(s: &str) -> Result<Vec<Interval>> {
    if s.trim().is_empty() {
        return Err(parse_err(0, "empty zone"));
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| parse_err(0, format!("zone interval {part:?} must be lo:hi")))?;
        let (lo, hi) = (parse_real(lo)?, parse_real(hi)?);
        if !(lo < hi) {
            return Err(parse_err(0, format!("zone interval {part:?} needs lo < hi")));
        }
        out.push(Interval::new(lo, hi)?);
    }
    out.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    if out.windows(2).any(|w| w[0].hi >= w[1].lo) {
        return Err(parse_err(0, format!("zone intervals in {s:?} overlap")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn key_values() {
        let kv = KeyValues::parse("# header\nform = monomial  # trailing\n\ngamma=2\n").unwrap();
        assert_eq!(kv.get("form"), Some("monomial"));
        assert_eq!(kv.unsigned("gamma").unwrap(), Some(2));
        assert_eq!(kv.line_of("gamma"), 4);
        assert!(matches!(KeyValues::parse("a=1\na=2"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(KeyValues::parse("a=1\nnot a pair"), Err(Error::Parse { line: 2, .. })));
        assert!(KeyValues::parse("a b = 1").is_err());
    }

    #[test]
    fn profile_round_trip() {
        let text = "form = polynomial\ncoeffs = 0, 1, 0, 0.3\nL_minus = 1\nL_plus = 2\ndelta = 0.5\n";
        let kv = ProfileKv::parse(text).unwrap();
        let p = kv.build(None).unwrap();
        assert_eq!(p.gamma(), 1);
        assert_eq!(kv.delta, Some(0.5));
        let again = ProfileKv::parse(&profile_to_kv(&p, kv.delta).unwrap()).unwrap().build(None).unwrap();
        assert_eq!(again, p);
        let m = ProfileKv::parse("form = monomial\ngamma = 2\nL_minus = 1\nL_plus = 1").unwrap();
        assert_eq!(m.build(None).unwrap().gamma(), 2);
    }

    #[test]
    fn profile_errors() {
        assert!(ProfileKv::parse("form = spline\nL_minus = 1\nL_plus = 1").is_err());
        assert!(ProfileKv::parse("form = monomial\nL_minus = 1").is_err());
        assert!(ProfileKv::parse("form = monomial\nL_minus = 1\nL_plus = 1\ncolor = red").is_err());
        assert!(ProfileKv::parse("form = tabulated\nL_minus = 1\nL_plus = 1").is_err());
        assert!(ProfileKv::parse("form = monomial\nL_minus = nan\nL_plus = 1").is_err());
        let flat = ProfileKv::parse("form = polynomial\ncoeffs = 1, 1\nL_minus = 1\nL_plus = 1").unwrap();
        assert!(flat.build(None).is_err());
    }

    #[test]
    fn tables() {
        let t = parse_table_csv("x,value\n-1,0.5\n# note\n0, 0\n1, 0.5\n").unwrap();
        assert_eq!(t.xs(), &[-1.0, 0.0, 1.0]);
        assert!(parse_table_csv("0,1\n0,2\n").is_err());
        assert!(parse_table_csv("0,1\n1,2,3\n").is_err());
        assert!(parse_table_csv("0,1\n").is_err());
        assert!(parse_table_csv("0,1\nx,2\n").is_err());
        let back = parse_table_csv(&write_table_csv(&t)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn compact_args() {
        assert_eq!(parse_profile_arg("monomial:2").unwrap(), ProfileArg::Monomial(2));
        assert_eq!(parse_profile_arg("tan").unwrap(), ProfileArg::Tangent);
        assert_eq!(parse_profile_arg("table:q.csv").unwrap(), ProfileArg::Table("q.csv".into()));
        assert!(parse_profile_arg("monomial:0").is_err());
        assert!(parse_profile_arg("table:").is_err());
        assert_eq!(parse_potential_arg("const:3").unwrap(), Compact::Ready(PotentialSpec::Constant(3.0)));
        assert_eq!(parse_measure_arg("cos").unwrap(), Compact::Ready(MeasureSpec::Cosine));
        assert!(parse_measure_arg("exp:").is_err());
        assert_eq!(parse_weight_arg("one").unwrap(), WeightSpec::one());
        let z = parse_zone_arg("0.5:1,-1:-0.5").unwrap();
        assert_eq!(z.len(), 2);
        assert_eq!(z[0].lo, -1.0);
        assert!(parse_zone_arg("1:0.5").is_err());
        assert!(parse_zone_arg("0:1,0.5:2").is_err());
        assert!(parse_sorted_list("64,91,128").is_ok());
        assert!(parse_sorted_list("64,64").is_err());
        assert!(parse_sorted_list("").is_err());
    }

    #[test]
    fn monomial_arg_with_gamma_override() {
        let p = parse_profile_arg("monomial:2").unwrap().build(1.0, 1.0, Some(1), None).unwrap();
        assert_eq!(p.gamma(), 1);
    }

    proptest! {
        #[test]
        fn key_values_never_panic(s in "\\PC{0,200}") {
            let _ = KeyValues::parse(&s);
            let _ = ProfileKv::parse(&s);
            let _ = parse_table_csv(&s);
            let _ = parse_zone_arg(&s);
            let _ = parse_profile_arg(&s);
        }

        #[test]
        fn zone_round_trip(lo in -10.0f64..10.0, w in 0.01f64..5.0) {
            let s = format!("{lo}:{}", lo + w);
            let z = parse_zone_arg(&s).unwrap();
            prop_assert_eq!(z[0].lo, lo);
            prop_assert_eq!(z[0].hi, lo + w);
        }
    }
}
