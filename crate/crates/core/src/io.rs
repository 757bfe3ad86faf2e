//! Artifact writers. Everything goes to disk through a temp-and-rename, so
//! an interrupted run never leaves a truncated file where a previous good
//! artifact used to be.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::discretization::{evaluate_kinematics, DeformationField, Grid2D};
use crate::energy::{psi, EnergyBreakdown, MaterialParams};
use crate::error::Error;
use crate::solver::TraceRow;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Legacy ASCII VTK structured grid of the deformed surface, with the area
/// Jacobian, Gaussian curvature and the energy density split as point data.
/// Degenerate nodes write zero curvature and energy so the file stays
/// loadable either way.
pub fn vtk_surface(field: &DeformationField, grid: &Grid2D, material: &MaterialParams) -> String {
    let states = evaluate_kinematics(field, grid);
    let densities: Vec<EnergyBreakdown> = states
        .iter()
        .map(|s| psi(&s.g, &s.f, material).unwrap_or_default())
        .collect();
    let n = grid.node_count();
    let mut out = String::with_capacity(160 * n);
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("deformed surface\n");
    out.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    out.push_str(&format!("DIMENSIONS {} {} 1\n", grid.nx, grid.ny));
    out.push_str(&format!("POINTS {n} double\n"));
    for v in &field.values {
        out.push_str(&format!("{:.12e} {:.12e} {:.12e}\n", v[0], v[1], v[2]));
    }
    out.push_str(&format!("POINT_DATA {n}\n"));
    push_scalars(&mut out, "J", states.iter().map(|s| s.j));
    push_scalars(
        &mut out,
        "kappa",
        states.iter().map(|s| s.surface.as_ref().map_or(0.0, |x| x.kappa)),
    );
    push_scalars(&mut out, "psi_total", densities.iter().map(|d| d.total));
    push_scalars(&mut out, "psi_membrane", densities.iter().map(|d| d.membrane));
    push_scalars(&mut out, "psi_bending", densities.iter().map(|d| d.bending));
    push_scalars(&mut out, "psi_barrier", densities.iter().map(|d| d.barrier));
    out
}

fn push_scalars(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
    for v in values {
        out.push_str(&format!("{v:.12e}\n"));
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(
        "iter,energy,membrane,bending,barrier,load_work,grad_norm,min_J,step_length\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r.iter,
            r.energy,
            r.membrane,
            r.bending,
            r.barrier,
            r.load_work,
            r.grad_norm,
            r.min_j,
            r.step,
        ));
    }
    out
}
