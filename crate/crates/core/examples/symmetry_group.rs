// One-parameter subgroups of the isometry group acting on the surface.

use curved2body::curvature_kernel::{geodesic_distance, point_pair};
use curved2body::symmetry::{act, exp_group, validate, AlgebraElement};

pub fn run_example() -> curved2body::Result<()> {
    let v = AlgebraElement::new(0.4, -0.3, 0.9);
    for kappa in [0.5, 0.0, -0.5] {
        let g = exp_group(kappa, &v, 1.3);
        validate(kappa, &g, 1e-12)?;
        let (a, b) = point_pair(kappa, 0.8)?;
        let (ga, gb) = (act(kappa, &g, &a)?, act(kappa, &g, &b)?);
        let d = geodesic_distance(kappa, &ga, &gb)?;
        println!("kappa = {kappa:>4}: group residual {:.1e}, distance after the action {d:.15}", g.group_residual(kappa));

        let back = g.compose(&g.inverse());
        assert!((back.linear() - nalgebra::Matrix3::identity()).norm() < 1e-12);
    }
    Ok(())
}

fn main() -> curved2body::Result<()> {
    run_example()
}
