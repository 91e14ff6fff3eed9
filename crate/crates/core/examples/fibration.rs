//! Builds a twisted G2-torus fibration with exact rational data and
//! prints its lattice generators and the induced 3-form.

use g2lab::exterior::Metric;
use g2lab::fibration::{build_fibration, FibrationSpec};
use g2lab::linalg::Mat;
use g2lab::scalar::{Rational, Scalar};

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn main() -> g2lab::Result<()> {
    let eta = Metric::new(Mat::diag(&[r(4, 1), r(1, 1), r(1, 1), r(9, 4)]))?;
    let alpha = Mat::from_fn(3, 4, |i, j| if i == j { r(1, 2) } else { r(0, 1) });
    let spec = FibrationSpec::new(eta, Mat::identity(3), alpha)?;
    let fib = build_fibration(&spec)?;

    println!("generators (columns):");
    for i in 0..7 {
        let row: Vec<String> = fib.generators().row(i).iter().map(|x| format!("{x:>5}")).collect();
        println!("  {}", row.join(" "));
    }
    println!("orthonormality residual {}", fib.orthonormality_residual());
    println!("product fibration: {}", fib.is_product());
    println!("phi = {}", fib.phi().to_json());
    Ok(())
}
