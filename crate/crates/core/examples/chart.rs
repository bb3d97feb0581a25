//! The canonical chart of the Grassmannian and the projection metric.

use riccati_escape::{
    build_net, chart_embed, chart_retract, grassmann_distance, Matrix, ProjectiveAngle, Retraction,
    SubspacePoint,
};

fn main() -> riccati_escape::Result<()> {
    // A 2-plane in R^4 as the graph of a 2x2 matrix, and back.
    let y = Matrix::from_rows(&[[1.0, -0.5], [0.25, 2.0]])?;
    let p = chart_embed(&y)?;
    println!("orthonormal basis:\n{:?}", p.basis());
    if let Retraction::OnChart(back) = chart_retract(&p) {
        println!("round trip: {:?}", back.as_slice());
    }

    // A plane containing a vertical direction has no graph.
    let vertical = SubspacePoint::from_spanning(&Matrix::from_rows(&[
        [1.0, 0.0],
        [0.0, 0.0],
        [0.0, 1.0],
        [0.0, 0.0],
    ])?)?;
    println!("off chart: {}", chart_retract(&vertical) == Retraction::OffChart);
    println!(
        "distance to the graph plane: {:.6}",
        grassmann_distance(&p, &vertical)?
    );

    for eps in [0.5, 0.1, 0.01] {
        let net = build_net(eps)?;
        let probe = ProjectiveAngle::new(0.123)?;
        let gap = net
            .iter()
            .map(|q| q.distance(probe))
            .fold(f64::INFINITY, f64::min);
        println!("epsilon {eps}: {} net points, probe within {gap:.2e}", net.len());
    }
    Ok(())
}
