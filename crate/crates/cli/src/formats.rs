//! CSV files. Every float is written with 17 significant digits.

use std::fmt::Write as _;

use radial_sbp::convergence::RichardsonReport;
use radial_sbp::evolution::Snapshot;
use radial_sbp::weights::Method;
use radial_sbp::{DeltaProfile, EnergyTrace, GridKind, SbpScheme, WeightTable};

use crate::CliError;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn method_name(m: Method) -> &'static str {
    m.name()
}

/// Content-addressed table name.
pub fn weights_file_name(method: Method, p: u32, kind: GridKind, i_star: u32) -> String {
    format!("weights_{}_p{p}_{kind}_{i_star}.csv", method_name(method))
}

pub fn delta_file_name(method: Method, p: u32, kind: GridKind, i_star: u32) -> String {
    format!("delta_{}_p{p}_{kind}_{i_star}.csv", method_name(method))
}

/// `# method=.. p=.. kind=.. i_star=.. chi=..`, then `i,wbar,vbar,u` rows.
/// The `u` field is empty past the last coupling.
pub fn write_weight_table(t: &WeightTable) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# method={} p={} kind={} i_star={} chi={}",
        method_name(t.method()),
        t.p(),
        t.kind(),
        t.i_star(),
        num(t.chi())
    );
    s.push_str("i,wbar,vbar,u\n");
    for k in 0..t.len() {
        let u = t.u().get(k).map(|&x| num(x)).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", t.index(k), num(t.wbar()[k]), num(t.vbar()[k]), u);
    }
    s
}

fn bad(line: usize, what: &str) -> CliError {
    CliError::Format(format!("weight table line {line}: {what}"))
}

pub fn read_weight_table(text: &str) -> Result<WeightTable, CliError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let fields: std::collections::BTreeMap<&str, &str> = header
        .trim_start_matches('#')
        .split_whitespace()
        .filter_map(|t| t.split_once('='))
        .collect();
    let field = |k: &str| fields.get(k).copied().ok_or_else(|| bad(1, &format!("missing {k}")));
    let method: Method = field("method")?.parse().map_err(|_| bad(1, "method"))?;
    let p: u32 = field("p")?.parse().map_err(|_| bad(1, "p"))?;
    let kind: GridKind = field("kind")?.parse().map_err(|_| bad(1, "kind"))?;
    let i_star: u32 = field("i_star")?.parse().map_err(|_| bad(1, "i_star"))?;
    let chi: f64 = field("chi")?.parse().map_err(|_| bad(1, "chi"))?;
    match lines.next() {
        Some((_, "i,wbar,vbar,u")) => {}
        _ => return Err(bad(2, "expected column header")),
    }
    let (mut wbar, mut vbar, mut u) = (Vec::new(), Vec::new(), Vec::new());
    for (n, line) in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad(n + 1, "expected four columns"));
        }
        let f = |c: &str| c.parse::<f64>().map_err(|_| bad(n + 1, "number"));
        wbar.push(f(cols[1])?);
        vbar.push(f(cols[2])?);
        if !cols[3].is_empty() {
            u.push(f(cols[3])?);
        }
    }
    Ok(WeightTable::from_parts(method, p, kind, i_star, chi, wbar, vbar, u)?)
}

/// `i,delta0,delta1[,delta2]`.
pub fn write_delta(d: &DeltaProfile) -> String {
    let fourth = !d.delta2.is_empty();
    let mut s = String::from(if fourth { "i,delta0,delta1,delta2\n" } else { "i,delta0,delta1\n" });
    for k in 0..d.len() {
        let _ = write!(s, "{},{},{}", d.index(k), num(d.delta0[k]), num(d.delta1[k]));
        if fourth {
            let _ = write!(s, ",{}", num(d.delta2[k]));
        }
        s.push('\n');
    }
    s
}

/// `operator,row,offset,value` for every stored entry of `D`, `D~`, `W`
/// and `W~`.
pub fn write_scheme(s: &SbpScheme) -> String {
    let mut out = String::from("operator,row,offset,value\n");
    for (name, op) in [("D", s.d()), ("Dtilde", s.dtilde())] {
        for (i, j, x) in op.entries() {
            let _ = writeln!(out, "{name},{i},{},{}", j as i64 - i as i64, num(x));
        }
    }
    for (name, norm) in [("W", s.w()), ("Wtilde", s.wtilde())] {
        for (i, &d) in norm.diag().iter().enumerate() {
            let _ = writeln!(out, "{name},{i},0,{}", num(d));
            let c = norm.coupling(i);
            if c != 0.0 {
                let _ = writeln!(out, "{name},{i},1,{}", num(c));
            }
        }
    }
    out
}

/// `t,i,r,pi,psi,pi_scaled,psi_scaled` with `scaled = r^{p/2} value`.
pub fn write_fields(scheme: &SbpScheme, snapshots: &[Snapshot]) -> String {
    let grid = scheme.grid();
    let half_p = grid.p() as f64 / 2.0;
    let mut s = String::from("t,i,r,pi,psi,pi_scaled,psi_scaled\n");
    for snap in snapshots {
        for k in 0..grid.len() {
            let r = grid.r(k);
            let w = r.powf(half_p);
            let (pi, psi) = (snap.state.pi[k], snap.state.psi[k]);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                num(snap.t),
                grid.index(k),
                num(r),
                num(pi),
                num(psi),
                num(w * pi),
                num(w * psi)
            );
        }
    }
    s
}

/// `t,E_hat,E_hat_b,E_pred,boundary_product`.
pub fn write_energy(trace: &EnergyTrace) -> String {
    let mut s = String::from("t,E_hat,E_hat_b,E_pred,boundary_product\n");
    for e in &trace.samples {
        let _ = writeln!(s, "{},{},{},{},{}", num(e.t), num(e.e_hat), num(e.e_hat_b), num(e.e_pred), num(e.boundary_product));
    }
    s
}

/// `t,norm,e_lo,e_hi,ratio,fitted_order`; `ratio` is the ratio of
/// successive level differences and `fitted_order` the order it implies.
pub fn write_convergence(reports: &[(&str, &RichardsonReport)]) -> String {
    let mut s = String::from("phase,t,norm,e_lo,e_hi,ratio,fitted_order\n");
    for (phase, report) in reports {
        for r in &report.rows {
            let _ = writeln!(
                s,
                "{phase},{},{},{},{},{},{}",
                num(r.t),
                r.norm.name(),
                num(r.e_lo),
                num(r.e_hi),
                num(r.ratio),
                num(r.order)
            );
        }
    }
    s
}
