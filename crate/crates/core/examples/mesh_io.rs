//! Round-trips a jittered mesh through the text format and writes a P2
//! interpolant as legacy VTK.

use std::io::BufReader;
use std::sync::Arc;

use nitsche_fem::fespace::{nodal_interpolate, write_vtk, FeSpace};
use nitsche_fem::mesh::{read_mesh, write_mesh, MeshFamily};

fn main() -> nitsche_fem::Result<()> {
    let mesh = MeshFamily::jittered(3).build(12)?;
    let mut text = Vec::new();
    write_mesh(&mesh, &mut text)?;
    let back = read_mesh(BufReader::new(text.as_slice()))?;
    println!("{:?}", back.stats());
    assert_eq!(back.vertices(), mesh.vertices());

    let space = FeSpace::new(Arc::new(back), 2)?;
    let u = nodal_interpolate(&space, |x| (std::f64::consts::PI * x[0]).sin() * x[1]);
    let path = std::env::temp_dir().join("mesh_io_example.vtk");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write_vtk(&u, "u", &mut f)?;
    println!("wrote {}", path.display());
    Ok(())
}
