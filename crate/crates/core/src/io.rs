//! CSV export.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! which round-trips every `f64`. Files may start with a `#` metadata line
//! (see [`write_metadata_line`]).

use std::io::Write;

use crate::addiff::{DensityField2D, DensityLine};
use crate::fpk1d::PhaseDensity;
use crate::sde::ParticleEnsemble;
use crate::stats::ErrorReport;
use crate::Result;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `# key=value key=value ...` in the given order.
pub fn write_metadata_line<W: Write>(w: &mut W, fields: &[(&str, String)]) -> Result<()> {
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(w, "# {}", body.join(" "))?;
    Ok(())
}

/// `path_index, model, x_1..x_D, v_1..v_D`; velocity cells are empty for
/// models without a velocity.
pub fn write_ensembles_csv<W: Write, const D: usize>(w: &mut W, ensembles: &[ParticleEnsemble<D>]) -> Result<()> {
    let mut header = vec!["path_index".to_string(), "model".to_string()];
    header.extend((1..=D).map(|i| format!("x_{i}")));
    header.extend((1..=D).map(|i| format!("v_{i}")));
    writeln!(w, "{}", header.join(","))?;
    for e in ensembles {
        for (i, x) in e.positions.iter().enumerate() {
            let mut row = vec![i.to_string(), e.model.name().to_string()];
            row.extend(x.iter().map(|c| fmt_f64(*c)));
            match &e.velocities {
                Some(v) => row.extend(v[i].iter().map(|c| fmt_f64(*c))),
                None => row.extend((0..D).map(|_| String::new())),
            }
            writeln!(w, "{}", row.join(","))?;
        }
    }
    Ok(())
}

/// `j, k, x, v, rho`
pub fn write_phase_density_csv<W: Write>(w: &mut W, rho: &PhaseDensity) -> Result<()> {
    writeln!(w, "j,k,x,v,rho")?;
    let g = &rho.grid;
    for j in 0..g.nx() {
        for k in 0..g.nv() {
            writeln!(w, "{j},{k},{},{},{}", fmt_f64(g.x(j)), fmt_f64(g.v(k)), fmt_f64(rho.get(j, k)))?;
        }
    }
    Ok(())
}

fn write_line<W: Write>(w: &mut W, line: &DensityLine, value_name: &str) -> Result<()> {
    writeln!(w, "j,x,{value_name}")?;
    for (j, v) in line.values.iter().enumerate() {
        writeln!(w, "{j},{},{}", fmt_f64(line.grid.center(j)), fmt_f64(*v))?;
    }
    Ok(())
}

/// `j, x, g` for a spatial marginal of the kinetic density.
pub fn write_marginal_csv<W: Write>(w: &mut W, g: &DensityLine) -> Result<()> {
    write_line(w, g, "g")
}

/// `j, x, u` for a 1D advection-diffusion density.
pub fn write_line_csv<W: Write>(w: &mut W, u: &DensityLine) -> Result<()> {
    write_line(w, u, "u")
}

/// `i, j, x1, x2, u`
pub fn write_field_csv<W: Write>(w: &mut W, u: &DensityField2D) -> Result<()> {
    writeln!(w, "i,j,x1,x2,u")?;
    let dx = u.dx();
    for i in 0..u.n {
        for j in 0..u.n {
            writeln!(
                w,
                "{i},{j},{},{},{}",
                fmt_f64((i as f64 + 0.5) * dx),
                fmt_f64((j as f64 + 0.5) * dx),
                fmt_f64(u.get(i, j))
            )?;
        }
    }
    Ok(())
}

/// Header of [`write_error_rows`].
pub const ERROR_COLUMNS: &str = "eps,error,stderr,model_a,model_b,phi_k,metric,flag";

/// One row per point: `eps, error, stderr, model_a, model_b, phi_k, metric,
/// flag`, where `flag` is `noise-dominated` or empty and absent values are
/// empty cells.
pub fn write_error_rows<W: Write>(w: &mut W, report: &ErrorReport) -> Result<()> {
    for p in &report.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(p.eps),
            fmt_f64(p.error),
            p.stderr.map(fmt_f64).unwrap_or_default(),
            report.model_a,
            report.model_b,
            report.phi_k.map(|k| k.to_string()).unwrap_or_default(),
            report.metric,
            if p.noise_dominated { "noise-dominated" } else { "" }
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addiff::Grid1D;
    use crate::fpk1d::{init_maxwellian, PhaseGrid};
    use crate::sde::Model;
    use crate::stats::ErrorPoint;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::TAU, 1e300] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn ensemble_layout() {
        let a = ParticleEnsemble::<2> {
            model: Model::Langevin,
            positions: vec![[0.5, 1.0]],
            velocities: Some(vec![[0.25, -1.0]]),
            base_seed: 1,
            time: 1.0,
        };
        let b = ParticleEnsemble::<2> { model: Model::Naive, velocities: None, ..a.clone() };
        let s = text(|w| write_ensembles_csv(w, &[a, b]));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "path_index,model,x_1,x_2,v_1,v_2");
        assert!(lines[1].starts_with("0,langevin,5.0000000000000000e-1,"));
        assert!(lines[2].starts_with("0,naive,") && lines[2].ends_with(",,"));
        assert_eq!(lines[2].split(',').count(), 6);
    }

    #[test]
    fn grid_layouts() {
        let g = PhaseGrid::new(4, 2, 2.0, 0.1).unwrap();
        let s = text(|w| write_phase_density_csv(w, &init_maxwellian(g)));
        assert_eq!(s.lines().count(), 1 + 4 * 4);
        assert_eq!(s.lines().next().unwrap(), "j,k,x,v,rho");

        let line = DensityLine::uniform(Grid1D::new(8).unwrap(), 0.5);
        let s = text(|w| write_marginal_csv(w, &line));
        assert_eq!(s.lines().next().unwrap(), "j,x,g");
        assert_eq!(s.lines().count(), 9);
        let s = text(|w| write_line_csv(w, &line));
        assert_eq!(s.lines().next().unwrap(), "j,x,u");

        let f = DensityField2D::uniform(4, 1.0).unwrap();
        let s = text(|w| write_field_csv(w, &f));
        assert_eq!(s.lines().count(), 17);
        assert!(s.lines().nth(1).unwrap().starts_with("0,0,"));
    }

    #[test]
    fn error_rows_and_metadata() {
        let mut r = ErrorReport::new("x", "corrected", "langevin", "weak_cos", Some(2));
        r.push(ErrorPoint { eps: 0.5, error: 0.1, stderr: Some(0.01), noise_dominated: true }).unwrap();
        r.push(ErrorPoint { eps: 0.25, error: 0.05, stderr: None, noise_dominated: false }).unwrap();
        let s = text(|w| write_error_rows(w, &r));
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].ends_with(",corrected,langevin,2,weak_cos,noise-dominated"));
        assert!(lines[1].contains(",,corrected,") && lines[1].ends_with("weak_cos,"));
        assert_eq!(ERROR_COLUMNS.split(',').count(), lines[1].split(',').count());

        let s = text(|w| write_metadata_line(w, &[("seed", "7".into()), ("version", "0.1.0".into())]));
        assert_eq!(s, "# seed=7 version=0.1.0\n");
    }
}
