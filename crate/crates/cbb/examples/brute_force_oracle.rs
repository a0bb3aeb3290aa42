//! Exhaustive ground-state search. Only viable for small instances, but
//! exact, which makes it the reference every other bound is tested
//! against.

use cbb::model::{brute_force_ground, energy, gen_random};

fn main() {
    let model = gen_random(12, 0.3, 3);
    let result = brute_force_ground(&model).expect("12 spins is within the enumeration cap");

    println!("n = {}, couplings = {}", model.n(), model.couplings().len());
    println!("ground energy = {}", result.energy);
    println!("configuration = {:?}", result.config.spins());

    // The reported energy is the energy of the reported configuration.
    let check = energy(&model, &result.config).unwrap();
    assert_eq!(check, result.energy);
    println!("re-evaluation matches: {check}");
}
