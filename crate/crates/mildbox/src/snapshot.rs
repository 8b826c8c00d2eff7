//! Binary field snapshot format:
//! header `{magic "MFLD", version u32, dim u32, M u32, L f64, component
//! count u32}`, then row-major little-endian `f64` values per component.

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::solver::{SolutionState, Trajectory};
use crate::duhamel::{ScalarTrajectory, VectorTrajectory};
use crate::timegrid::TimeGrid;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"MFLD";
const VERSION: u32 = 1;

/// Write one snapshot with any number of components.
pub fn write_components(path: &Path, grid: &Grid, components: &[&[f64]]) -> Result<()> {
    let n = grid.total_points();
    for comp in components {
        if comp.len() != n {
            return Err(Error::Snapshot(format!(
                "component has {} values, grid needs {n}",
                comp.len()
            )));
        }
    }
    let mut buf: Vec<u8> =
        Vec::with_capacity(4 + 4 * 4 + 8 + components.len() * n * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.box_length().to_le_bytes());
    buf.extend_from_slice(&(components.len() as u32).to_le_bytes());
    for comp in components {
        for v in *comp {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Read a snapshot back as the grid and raw component arrays.
pub fn read_components(path: &Path) -> Result<(Grid, Vec<Vec<f64>>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 24 || &bytes[0..4] != MAGIC {
        return Err(Error::Snapshot(format!("{} is not a field snapshot", path.display())));
    }
    let u32_at = |off: usize| -> u32 {
        u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap())
    };
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported snapshot version {version}")));
    }
    let dim = u32_at(8) as usize;
    let m = u32_at(12) as usize;
    let l = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let count = u32_at(24) as usize;
    let grid = Grid::new(dim, l, m)?;
    let n = grid.total_points();
    let expected = 28 + count * n * 8;
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "snapshot has {} bytes, header promises {expected}",
            bytes.len()
        )));
    }
    let mut comps = Vec::with_capacity(count);
    let mut off = 28;
    for _ in 0..count {
        let mut comp = Vec::with_capacity(n);
        for _ in 0..n {
            comp.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
            off += 8;
        }
        comps.push(comp);
    }
    Ok((grid, comps))
}

pub fn write_scalar(path: &Path, f: &ScalarField) -> Result<()> {
    write_components(path, f.grid(), &[f.values()])
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    let (grid, comps) = read_components(path)?;
    if comps.len() != 1 {
        return Err(Error::Snapshot(format!(
            "expected a scalar snapshot, found {} components",
            comps.len()
        )));
    }
    ScalarField::from_values(grid, comps.into_iter().next().unwrap())
}

pub fn write_vector(path: &Path, v: &VectorField) -> Result<()> {
    let comps: Vec<&[f64]> = v.components().iter().map(|c| c.values()).collect();
    write_components(path, v.grid(), &comps)
}

pub fn read_vector(path: &Path) -> Result<VectorField> {
    let (grid, comps) = read_components(path)?;
    if comps.len() != grid.dim() {
        return Err(Error::Snapshot(format!(
            "expected {} components, found {}",
            grid.dim(),
            comps.len()
        )));
    }
    VectorField::from_components(
        comps
            .into_iter()
            .map(|c| ScalarField::from_values(grid.clone(), c))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Time-index manifest of an on-disk trajectory.
#[derive(Serialize, Deserialize)]
struct TrajectoryIndex {
    times: Vec<f64>,
    has_attractant: bool,
    files: Vec<String>,
}

/// Persist a trajectory: one multi-component snapshot per node plus a JSON
/// time index.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    let grid = traj.grid().clone();
    let mut files = Vec::new();
    for (k, &_t) in traj.times().nodes().iter().enumerate() {
        let name = format!("state_{k:05}.mfld");
        let mut comps: Vec<&[f64]> = vec![traj.c.fields[k].values(), traj.n.fields[k].values()];
        for ax in 0..grid.dim() {
            comps.push(traj.u.fields[k].component(ax).values());
        }
        if let Some(v) = &traj.v {
            comps.push(v.fields[k].values());
        }
        write_components(&dir.join(&name), &grid, &comps)?;
        files.push(name);
    }
    let index = TrajectoryIndex {
        times: traj.times().nodes().to_vec(),
        has_attractant: traj.v.is_some(),
        files,
    };
    let json = serde_json::to_string_pretty(&index)
        .map_err(|e| Error::Snapshot(format!("index encode: {e}")))?;
    fs::write(dir.join("trajectory.json"), json)?;
    Ok(())
}

/// Load a trajectory written by [`write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(dir.join("trajectory.json"))?;
    let index: TrajectoryIndex = serde_json::from_str(&text)
        .map_err(|e| Error::Snapshot(format!("index decode: {e}")))?;
    let times = TimeGrid::from_nodes(index.times)?;
    let mut c_fields = Vec::new();
    let mut n_fields = Vec::new();
    let mut u_fields = Vec::new();
    let mut v_fields = Vec::new();
    for name in &index.files {
        let (grid, comps) = read_components(&dir.join(name))?;
        let dim = grid.dim();
        let expected = 2 + dim + usize::from(index.has_attractant);
        if comps.len() != expected {
            return Err(Error::Snapshot(format!(
                "state file {name} has {} components, expected {expected}",
                comps.len()
            )));
        }
        let mut it = comps.into_iter();
        c_fields.push(ScalarField::from_values(grid.clone(), it.next().unwrap())?);
        n_fields.push(ScalarField::from_values(grid.clone(), it.next().unwrap())?);
        let u = (0..dim)
            .map(|_| ScalarField::from_values(grid.clone(), it.next().unwrap()))
            .collect::<Result<Vec<_>>>()?;
        u_fields.push(VectorField::from_components(u)?);
        if index.has_attractant {
            v_fields.push(ScalarField::from_values(grid.clone(), it.next().unwrap())?);
        }
    }
    Ok(Trajectory {
        c: ScalarTrajectory::new(times.clone(), c_fields)?,
        n: ScalarTrajectory::new(times.clone(), n_fields)?,
        u: VectorTrajectory::new(times.clone(), u_fields)?,
        v: if index.has_attractant {
            Some(ScalarTrajectory::new(times, v_fields)?)
        } else {
            None
        },
    })
}

/// Round-trip the initial state of a run (used by the `norms` subcommand).
pub fn write_state(path: &Path, state: &SolutionState) -> Result<()> {
    let grid = state.grid().clone();
    let mut comps: Vec<&[f64]> = vec![state.c.values(), state.n.values()];
    for ax in 0..grid.dim() {
        comps.push(state.u.component(ax).values());
    }
    if let Some(v) = &state.v {
        comps.push(v.values());
    }
    write_components(path, &grid, &comps)
}
