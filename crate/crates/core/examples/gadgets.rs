//! Integer ReLU gadgets and how they compose into larger networks.
//!
//!     cargo run --example gadgets

use gradedmu::gnn::{gadgets, Circuit};

fn main() {
    for (name, net) in gadgets::all() {
        println!("{name:<10} in={} depth={} hidden={}", net.input_width(), net.depth(), net.hidden_units());
    }

    let gt = gadgets::gt();
    for (a, b) in [(3, 1), (1, 1), (-4, 2)] {
        println!("gt({a}, {b}) = {:?}", gt.eval(&[a, b]).unwrap());
    }

    // [a > b] or [c = d], composed from separate networks
    let net = gadgets::gt().parallel(&gadgets::eq()).compose(&gadgets::or());
    println!("gt|eq on (5, 2, 7, 8) = {:?}", net.eval(&[5, 2, 7, 8]).unwrap());

    // the same function written as a single circuit
    let mut c = Circuit::new(4);
    let (a, b, x, y) = (c.input(0), c.input(1), c.input(2), c.input(3));
    let l = c.gt(&a, &b);
    let r = c.eq(&x, &y);
    let out = c.or(&l, &r);
    let flat = c.build(&[out]);
    println!("flat circuit: depth {} vs composed depth {}", flat.depth(), net.depth());
    assert_eq!(flat.eval(&[5, 2, 7, 8]).unwrap(), net.eval(&[5, 2, 7, 8]).unwrap());
}
