//! Score an externally produced configuration, for instance an annealer
//! sample, against a certificate. The certificate pins the instance by
//! digest, so a report is only produced for the model it was solved on.

use cbb::bnb::{solve_cbb, verify_external, SolveParams};
use cbb::model::{energy, gen_triangular, SpinConfiguration};

fn main() {
    let model = gen_triangular(4, 4, 1.5, 11);
    let cert = solve_cbb(&model, &SolveParams::default()).unwrap();
    println!("certified ground energy = {:.9}", cert.upper);

    // A deliberately excited sample: the certified state with two flips.
    let mut spins = cert.config.spins().to_vec();
    spins[0] = -spins[0];
    spins[7] = -spins[7];
    let sample = SpinConfiguration::new(spins).unwrap();
    println!("sample energy           = {:.9}", energy(&model, &sample).unwrap());

    let report = verify_external(&cert, &model, &sample).unwrap();
    println!("gap to certified lower  = {:.9}", report.gap_to_lower);
    println!("gap to certified upper  = {:.9}", report.gap_to_upper);
    println!("hamming distance        = {}", report.hamming_distance);
    println!("reaches ground level    = {}", report.certified_ground);

    assert_eq!(report.hamming_distance, 2);
    assert!(report.gap_to_lower >= -1e-9);
}
