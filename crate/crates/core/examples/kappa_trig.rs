// κ-trigonometry and geodesic distance on the three model surfaces.

use curved2body::curvature_kernel::{antipode, cos_kappa, geodesic_distance, point_pair, sin_kappa, Curvature};

pub fn run_example() -> curved2body::Result<()> {
    for kappa in [1.0, 0.0, -1.0] {
        let x = 0.7;
        let (s, c) = (sin_kappa(kappa, x), cos_kappa(kappa, x));
        println!("kappa = {kappa:>4}: sin = {s:.12}, cos = {c:.12}, cos^2 + kappa sin^2 = {:.15}", c * c + kappa * s * s);

        let (a, b) = point_pair(kappa, 1.2)?;
        let d = geodesic_distance(kappa, &a, &b)?;
        println!("             distance between the pair at q = 1.2: {d:.15}");
        assert!((d - 1.2).abs() < 1e-12);
    }

    let sphere = Curvature::new(0.25);
    println!("kappa = 0.25: right angle at q = {:?}, antipode at q = {:?}", sphere.right_angle(), sphere.max_separation());
    let (a, _) = point_pair(0.25, 1.0)?;
    let far = antipode(0.25, &a)?;
    println!("antipodal distance = {:.12}", geodesic_distance(0.25, &a, &far)?);
    Ok(())
}

fn main() -> curved2body::Result<()> {
    run_example()
}
