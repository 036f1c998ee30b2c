//! Legacy ASCII VTK export of an unstructured tetrahedral grid with the
//! solution fields. Every common post-processor reads this dialect; the
//! library itself never reads VTK back.

use mefem::algebra::{hodge_star, metric_sharp, Metric, PCovector};
use mefem::mesh::SimplicialMesh;
use mefem::solve::SolveReport;
use mefem::valued::CovectorValuedForm;
use std::fmt::Write as _;

/// Proxy vector of a 2-form (its Hodge dual raised by the metric): the
/// classical flux-density vector of an induction 2-form.
fn two_form_vector(metric: &Metric, b: &PCovector) -> [f64; 3] {
    metric_sharp(metric, &hodge_star(metric, b)).unwrap().as_vector()
}

/// Proxy vector of a 1-form.
fn one_form_vector(metric: &Metric, a: &PCovector) -> [f64; 3] {
    metric_sharp(metric, a).unwrap().as_vector()
}

/// Classical stress-tensor components of a covector-valued 2-form: row i
/// holds the flux proxy of the i-th covector row.
fn stress_tensor(metric: &Metric, s: &CovectorValuedForm) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        t[i] = two_form_vector(metric, &s.row(i));
    }
    t
}

/// Renders the mesh and every available report field.
pub fn render_vtk(mesh: &SimplicialMesh, metric: &Metric, report: &SolveReport) -> String {
    let mut out = String::new();
    writeln!(out, "# vtk DataFile Version 3.0").unwrap();
    writeln!(out, "mefem solution fields").unwrap();
    writeln!(out, "ASCII").unwrap();
    writeln!(out, "DATASET UNSTRUCTURED_GRID").unwrap();

    writeln!(out, "POINTS {} double", mesh.vertex_count()).unwrap();
    for v in 0..mesh.vertex_count() {
        let p = mesh.vertex(v);
        writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    writeln!(out, "CELLS {} {}", mesh.tet_count(), 5 * mesh.tet_count()).unwrap();
    for t in 0..mesh.tet_count() {
        let ids = mesh.tet(t);
        writeln!(out, "4 {} {} {} {}", ids[0], ids[1], ids[2], ids[3]).unwrap();
    }
    writeln!(out, "CELL_TYPES {}", mesh.tet_count()).unwrap();
    for _ in 0..mesh.tet_count() {
        writeln!(out, "10").unwrap();
    }

    if let Some(nu) = &report.displacement {
        writeln!(out, "POINT_DATA {}", mesh.vertex_count()).unwrap();
        writeln!(out, "VECTORS displacement double").unwrap();
        for v in nu.values() {
            writeln!(out, "{} {} {}", v[0], v[1], v[2]).unwrap();
        }
    }

    writeln!(out, "CELL_DATA {}", mesh.tet_count()).unwrap();
    writeln!(out, "SCALARS region int 1").unwrap();
    writeln!(out, "LOOKUP_TABLE default").unwrap();
    for t in 0..mesh.tet_count() {
        writeln!(out, "{}", mesh.region(t)).unwrap();
    }

    if let Some(strain) = &report.strain {
        writeln!(out, "TENSORS strain double").unwrap();
        for eps in strain.values() {
            let m = eps.component_matrix();
            for row in m {
                writeln!(out, "{} {} {}", row[0], row[1], row[2]).unwrap();
            }
        }
    }
    if let Some(stress) = &report.stress {
        writeln!(out, "TENSORS stress double").unwrap();
        for s in stress.values() {
            for row in stress_tensor(metric, s) {
                writeln!(out, "{} {} {}", row[0], row[1], row[2]).unwrap();
            }
        }
    }
    if let Some(maxwell) = &report.magnetic_stress {
        writeln!(out, "TENSORS magnetic_stress double").unwrap();
        for s in maxwell.values() {
            for row in stress_tensor(metric, s) {
                writeln!(out, "{} {} {}", row[0], row[1], row[2]).unwrap();
            }
        }
    }
    if let Some(b) = &report.induction {
        writeln!(out, "VECTORS induction double").unwrap();
        for form in b.values() {
            let v = two_form_vector(metric, form);
            writeln!(out, "{} {} {}", v[0], v[1], v[2]).unwrap();
        }
    }
    if let Some(h) = &report.field_intensity {
        writeln!(out, "VECTORS field_intensity double").unwrap();
        for form in h.values() {
            let v = one_form_vector(metric, form);
            writeln!(out, "{} {} {}", v[0], v[1], v[2]).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use mefem::mesh::generate_box_mesh;

    #[test]
    fn renders_geometry_without_fields() {
        let mesh = generate_box_mesh([1.0, 1.0, 1.0], [1, 1, 1]).unwrap();
        let text = render_vtk(&mesh, &Metric::euclidean(), &SolveReport::default());
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("POINTS 8 double"));
        assert!(text.contains("CELLS 6 30"));
        assert!(text.contains("SCALARS region int 1"));
    }

    #[test]
    fn induction_proxy_is_the_flux_vector() {
        let g = Metric::euclidean();
        let b = PCovector::basis(2, 0); // dx∧dy
        assert_eq!(two_form_vector(&g, &b), [0.0, 0.0, 1.0]);
    }
}
