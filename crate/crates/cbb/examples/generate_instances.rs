//! Build one instance from each benchmark family and show the canonical
//! text form. Generators are deterministic in the seed, so the digests
//! printed here identify the instances exactly.

use cbb::model::{gen_chimera, gen_random, gen_square, gen_triangular, serialize_instance};

fn main() {
    let instances = [
        ("square 4x4", gen_square(4, 1.5, 1)),
        ("triangular 3x3", gen_triangular(3, 3, 1.5, 1)),
        ("chimera 2x2", gen_chimera(2, 1.5, 1)),
        ("random n=10 p=0.3", gen_random(10, 0.3, 1)),
    ];
    for (name, model) in &instances {
        println!(
            "{name:<20} n={:<4} edges={:<4} digest={}",
            model.n(),
            model.couplings().len(),
            &model.digest()[..16],
        );
    }

    let small = gen_random(4, 0.5, 7);
    println!("\ncanonical text of {}-spin random instance:", small.n());
    print!("{}", serialize_instance(&small).expect("generated models have no offset"));
}
