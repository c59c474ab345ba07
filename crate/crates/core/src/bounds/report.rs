use std::fmt::{self, Write as _};

use serde::Serialize;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
    Limit,
    Exact,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Limit => "limit",
            BoundKind::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    pub params: Vec<(&'static str, f64)>,
    pub kind: BoundKind,
    pub value: f64,
}

/// Parameters shared by every bound; each bound reads the ones it needs.
/// `lambda_e` and `lambda` are always required.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundParams {
    pub lambda_e: Option<f64>,
    pub lambda: Option<f64>,
    /// Total gossip capacity; defaults to `nλ`.
    pub b: Option<f64>,
    pub n: Option<usize>,
    pub q: Option<f64>,
    pub c: Option<usize>,
    pub m: Option<usize>,
    pub p: Option<f64>,
    pub nu: Option<f64>,
    /// 1-based node index for the power-law bounds.
    pub i: Option<usize>,
    pub k: Option<u64>,
    /// Direct source rate of one node, for the asymmetric bound.
    pub lambda_i: Option<f64>,
    /// Head age fed to the finite-`m` leaf bound; defaults to the head bound.
    pub a1: Option<f64>,
}

pub const BOUND_NAMES: [&str; 21] = [
    "min-age",
    "min-age-limit",
    "asuman-ub",
    "asuman-limit",
    "sensing-b",
    "sensing-b-limit",
    "partial-pi",
    "partial-ub",
    "not-min-prob",
    "ring-lb",
    "cluster-head-ub",
    "cluster-head-limit",
    "cluster-leaf-ub",
    "cluster-leaf-limit",
    "cluster-optimum",
    "disconnected-cluster-ub",
    "ring-cluster-ub",
    "asym-ub",
    "asym-limits",
    "power-law-ub",
    "power-law-limit",
];

enum Lookup {
    Missing(&'static str),
    Failed(Error),
}

impl From<Error> for Lookup {
    fn from(e: Error) -> Self {
        Lookup::Failed(e)
    }
}

fn need<T>(v: Option<T>, name: &'static str) -> Result<T, Lookup> {
    v.ok_or(Lookup::Missing(name))
}

fn evaluate(name: &str, p: &BoundParams) -> Result<Vec<BoundReport>, Lookup> {
    let le = need(p.lambda_e, "lambda_e")?;
    let l = need(p.lambda, "lambda")?;
    let base = vec![("lambda_e", le), ("lambda", l)];
    let one = |name: &'static str, extra: Vec<(&'static str, f64)>, kind, value| {
        let mut params = base.clone();
        params.extend(extra);
        vec![BoundReport {
            name,
            params,
            kind,
            value,
        }]
    };
    let reports = match name {
        "min-age" => {
            let k = need(p.k, "k")?;
            one(
                "min-age",
                vec![("k", k as f64)],
                BoundKind::Exact,
                min_age_mean(k, le, l)?,
            )
        }
        "min-age-limit" => one(
            "min-age-limit",
            vec![],
            BoundKind::Limit,
            min_age_limit(le, l)?,
        ),
        "asuman-ub" => {
            let n = need(p.n, "n")?;
            let b = p.b.unwrap_or(n as f64 * l);
            one(
                "asuman-ub",
                vec![("n", n as f64), ("B", b)],
                BoundKind::Upper,
                asuman_ub(n, b, le, l)?,
            )
        }
        "asuman-limit" => one(
            "asuman-limit",
            vec![],
            BoundKind::Limit,
            asuman_ub_limit(le, l)?,
        ),
        "sensing-b" => {
            let k = need(p.k, "k")?;
            one(
                "sensing-b",
                vec![("k", k as f64)],
                BoundKind::Upper,
                sensing_bound_b(k, le, l)?,
            )
        }
        "sensing-b-limit" => one(
            "sensing-b-limit",
            vec![],
            BoundKind::Limit,
            sensing_bound_b_limit(le, l)?,
        ),
        "partial-pi" => {
            let q = need(p.q, "q")?;
            one(
                "partial-pi",
                vec![("q", q)],
                BoundKind::Lower,
                partial_pi_tilde(q, le, l)?,
            )
        }
        "partial-ub" => {
            let q = need(p.q, "q")?;
            one(
                "partial-ub",
                vec![("q", q)],
                BoundKind::Upper,
                partial_ub(q, le, l)?,
            )
        }
        "not-min-prob" => {
            let n = need(p.n, "n")?;
            let v = not_min_prob_lb(n, le, l)?;
            one("not-min-prob", vec![("n", n as f64)], BoundKind::Lower, v)
        }
        "ring-lb" => {
            let n = need(p.n, "n")?;
            one(
                "ring-lb",
                vec![("n", n as f64)],
                BoundKind::Lower,
                ring_lb(n, le, l)?,
            )
        }
        "cluster-head-ub" => {
            let (c, pp) = (need(p.c, "c")?, need(p.p, "p")?);
            let v = cluster_head_ub(c, pp, le, l)?;
            one(
                "cluster-head-ub",
                vec![("c", c as f64), ("p", pp)],
                BoundKind::Upper,
                v,
            )
        }
        "cluster-head-limit" => {
            let pp = need(p.p, "p")?;
            one(
                "cluster-head-limit",
                vec![("p", pp)],
                BoundKind::Limit,
                cluster_head_ub_limit(pp, le, l)?,
            )
        }
        "cluster-leaf-ub" => {
            let (m, pp) = (need(p.m, "m")?, need(p.p, "p")?);
            let a1 = match (p.a1, p.c) {
                (Some(a1), _) => a1,
                (None, Some(c)) => cluster_head_ub(c, pp, le, l)?,
                (None, None) => cluster_head_ub_limit(pp, le, l)?,
            };
            let v = cluster_leaf_ub(m, pp, le, l, a1)?;
            one(
                "cluster-leaf-ub",
                vec![("m", m as f64), ("p", pp), ("a1", a1)],
                BoundKind::Upper,
                v,
            )
        }
        "cluster-leaf-limit" => {
            let pp = need(p.p, "p")?;
            one(
                "cluster-leaf-limit",
                vec![("p", pp)],
                BoundKind::Limit,
                cluster_leaf_ub_limit(pp, le, l)?,
            )
        }
        "cluster-optimum" => {
            let (pp, v) = cluster_optimum(le, l)?;
            one("cluster-optimum", vec![("p", pp)], BoundKind::Limit, v)
        }
        "disconnected-cluster-ub" => {
            let c = need(p.c, "c")?;
            let v = disconnected_cluster_ub(c, le, l)?;
            one(
                "disconnected-cluster-ub",
                vec![("c", c as f64)],
                BoundKind::Upper,
                v,
            )
        }
        "ring-cluster-ub" => {
            let (c, pp) = (need(p.c, "c")?, need(p.p, "p")?);
            let v = ring_cluster_ub(c, pp, le, l)?;
            one(
                "ring-cluster-ub",
                vec![("c", c as f64), ("p", pp)],
                BoundKind::Upper,
                v,
            )
        }
        "asym-ub" => {
            let (li, n) = (need(p.lambda_i, "lambda_i")?, need(p.n, "n")?);
            let b = p.b.unwrap_or(n as f64 * l);
            let v = asym_ub(li, n, b, le, l)?;
            one(
                "asym-ub",
                vec![("lambda_i", li), ("n", n as f64), ("B", b)],
                BoundKind::Upper,
                v,
            )
        }
        "asym-limits" => {
            let (upper, best) = asym_limits(le, l)?;
            let mut r = one("asym-limit-upper", vec![], BoundKind::Limit, upper);
            r.extend(one("asym-limit-best", vec![], BoundKind::Limit, best));
            r
        }
        "power-law-ub" => {
            let (i, nu, n) = (need(p.i, "i")?, need(p.nu, "nu")?, need(p.n, "n")?);
            let v = power_law_ub(i, nu, n, le, l)?;
            one(
                "power-law-ub",
                vec![("i", i as f64), ("nu", nu), ("n", n as f64)],
                BoundKind::Upper,
                v,
            )
        }
        "power-law-limit" => {
            let (i, nu) = (need(p.i, "i")?, need(p.nu, "nu")?);
            let v = power_law_ub_limit(i, nu, le, l)?;
            one(
                "power-law-limit",
                vec![("i", i as f64), ("nu", nu)],
                BoundKind::Limit,
                v,
            )
        }
        other => {
            return Err(Lookup::Failed(Error::invalid(format!(
                "unknown bound {other:?}; known bounds: {}",
                BOUND_NAMES.join(", ")
            ))))
        }
    };
    Ok(reports)
}

/// Evaluates one bound by name. Missing parameters are an error.
pub fn named_report(name: &str, params: &BoundParams) -> Result<Vec<BoundReport>> {
    evaluate(name, params).map_err(|e| match e {
        Lookup::Missing(p) => Error::invalid(format!("bound {name} needs parameter {p}")),
        Lookup::Failed(e) => e,
    })
}

/// Evaluates every bound whose parameters are present. Bounds missing a
/// parameter are skipped; invalid values are still errors.
pub fn all_reports(params: &BoundParams) -> Result<Vec<BoundReport>> {
    if params.lambda_e.is_none() || params.lambda.is_none() {
        return Err(Error::invalid("bounds need both lambda_e and lambda"));
    }
    let mut out = Vec::new();
    for name in BOUND_NAMES {
        match evaluate(name, params) {
            Ok(r) => out.extend(r),
            Err(Lookup::Missing(_)) => {}
            Err(Lookup::Failed(e)) => return Err(e),
        }
    }
    Ok(out)
}

fn params_field(params: &[(&str, f64)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl BoundReport {
    pub fn params_string(&self) -> String {
        params_field(&self.params)
    }
}

pub fn render_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("name,params,kind,value\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.name,
            r.params_string(),
            r.kind,
            r.value
        );
    }
    out
}

pub fn render_text(reports: &[BoundReport]) -> String {
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| {
            [
                r.name.to_string(),
                r.params_string(),
                r.kind.to_string(),
                format!("{:.6}", r.value),
            ]
        })
        .collect();
    let header = ["bound", "parameters", "kind", "value"];
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: [&str; 4]| {
        let _ = writeln!(
            out,
            "{:<w0$}  {:<w1$}  {:<w2$}  {:>w3$}",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3]
        );
    };
    line(&mut out, header);
    for row in &rows {
        line(&mut out, [&row[0], &row[1], &row[2], &row[3]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shared() -> BoundParams {
        BoundParams {
            lambda_e: Some(1.0),
            lambda: Some(1.0),
            n: Some(100),
            q: Some(0.5),
            c: Some(10),
            p: Some(0.5),
            ..Default::default()
        }
    }

    fn value(reports: &[BoundReport], name: &str) -> f64 {
        reports.iter().find(|r| r.name == name).unwrap().value
    }

    #[test]
    fn all_contains_headline_values() {
        let r = all_reports(&shared()).unwrap();
        assert_eq!(value(&r, "asuman-limit"), 3.0);
        assert!((value(&r, "partial-ub") - 11.0).abs() < 1e-12);
        assert_eq!(value(&r, "cluster-optimum"), 8.0);
        assert_eq!(value(&r, "disconnected-cluster-ub"), 13.0);
        // No k, nu, i or m given.
        assert!(r
            .iter()
            .all(|x| x.name != "min-age" && x.name != "power-law-ub"));
    }

    #[test]
    fn named_lookup_and_errors() {
        let p = BoundParams {
            lambda_e: Some(2.0),
            lambda: Some(1.0),
            ..Default::default()
        };
        assert_eq!(named_report("asuman-limit", &p).unwrap()[0].value, 5.0);
        let missing = BoundParams {
            lambda_e: Some(1.0),
            ..Default::default()
        };
        assert!(named_report("asuman-limit", &missing).is_err());
        assert!(all_reports(&missing).is_err());
        let err = named_report("ring-lb", &p).unwrap_err().to_string();
        assert!(err.contains("needs parameter n"), "{err}");
        assert!(named_report("nonsense", &p).is_err());
        let bad_q = BoundParams {
            q: Some(1.5),
            ..shared()
        };
        assert!(all_reports(&bad_q).is_err());
    }

    #[test]
    fn every_name_evaluates_with_full_params() {
        let p = BoundParams {
            m: Some(10),
            nu: Some(0.75),
            i: Some(3),
            k: Some(4),
            lambda_i: Some(0.2),
            ..shared()
        };
        for name in BOUND_NAMES {
            let r = named_report(name, &p).unwrap();
            assert!(r.iter().all(|x| x.value.is_finite()), "{name}");
        }
    }

    #[test]
    fn rendering() {
        let p = BoundParams {
            lambda_e: Some(1.0),
            lambda: Some(1.0),
            ..Default::default()
        };
        let r = named_report("asuman-limit", &p).unwrap();
        assert_eq!(
            render_csv(&r),
            "name,params,kind,value\nasuman-limit,lambda_e=1 lambda=1,limit,3\n"
        );
        let text = render_text(&r);
        assert!(text.starts_with("bound"));
        assert!(text.contains("3.000000"));
    }
}
