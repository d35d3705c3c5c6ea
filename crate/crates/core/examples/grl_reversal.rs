//! The gradient reversal layer: identity forward, `-λ` times the upstream
//! gradient backward.

use dadg::grl::GradientReversal;
use dadg::tensor::Matrix;

fn main() {
    let x = Matrix::from_vec(1, 3, vec![0.5, -1.0, 2.0]).unwrap();
    for lambda in [0.0, 0.5, 1.0] {
        let grl = GradientReversal::new(lambda);
        println!(
            "lambda {lambda}: forward {:?} backward {:?}",
            grl.forward(&x).as_slice(),
            grl.backward(&x).as_slice()
        );
    }
}
