use elastica_core::catalog::monodromy_angle;
use elastica_core::elliptic::Modulus;
use std::f64::consts::PI;

fn main() {
    for i in 1..=70 {
        let p = 0.01 * i as f64;
        match monodromy_angle(Modulus::new(p).unwrap()) {
            Ok(a) => println!("p={p:.2}  angle={a:.8}  angle/2pi={:.6}", a / (2.0 * PI)),
            Err(e) => println!("p={p:.2}  error: {e}"),
        }
    }
}
