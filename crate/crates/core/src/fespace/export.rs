use std::io::Write;

use super::FeFunction;
use crate::Result;

/// `dof_index,x,y,value`, one row per dof.
pub fn write_csv<W: Write>(f: &FeFunction, mut w: W) -> Result<()> {
    writeln!(w, "dof_index,x,y,value")?;
    for (i, (p, v)) in f.space().dof_coords().iter().zip(f.coeffs()).enumerate() {
        writeln!(w, "{i},{:.12e},{:.12e},{:.12e}", p[0], p[1], v)?;
    }
    Ok(())
}

/// Legacy ASCII VTK unstructured grid with the dof values as point data.
///
/// P2 fields are written on the once-refined submesh whose vertices are the P2 nodes.
pub fn write_vtk<W: Write>(f: &FeFunction, name: &str, mut w: W) -> Result<()> {
    let space = f.space();
    let pts = space.dof_coords();
    let mut cells: Vec<[usize; 3]> = Vec::new();
    for k in 0..space.num_elements() {
        let d = space.element_dofs(k);
        if space.order() == 1 {
            cells.push([d[0], d[1], d[2]]);
        } else {
            // 3 = (0,1), 4 = (1,2), 5 = (2,0)
            cells.push([d[0], d[3], d[5]]);
            cells.push([d[3], d[1], d[4]]);
            cells.push([d[5], d[4], d[2]]);
            cells.push([d[3], d[4], d[5]]);
        }
    }
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{name}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", pts.len())?;
    for p in pts {
        writeln!(w, "{:.9e} {:.9e} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {} {}", cells.len(), 4 * cells.len())?;
    for c in &cells {
        writeln!(w, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in &cells {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", pts.len())?;
    writeln!(w, "SCALARS {name} double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in f.coeffs() {
        writeln!(w, "{v:.9e}")?;
    }
    Ok(())
}
