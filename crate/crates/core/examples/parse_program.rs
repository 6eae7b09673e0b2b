//! Parse a scenario, print its syntax tree, and show a caret diagnostic.
//!
//! `cargo run --example parse_program -- scenarios/vacuum.scn`

use scenium::lang::{format_diagnostic, parse, pretty_print, sexpr};

const DEFAULT: &str = "ego = new Ball at (0, 0, 1.25)\nnew Plane at (2, 0, 0), facing toward ego\n";

fn main() {
    let src = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => DEFAULT.to_string(),
    };
    match parse(&src) {
        Ok(program) => {
            println!("{}", sexpr(&program));
            println!("---\n{}", pretty_print(&program));
        }
        Err(e) => print!("{}", format_diagnostic(&e, &src)),
    }
    let broken = "ego = new Ball at\n";
    print!("{}", format_diagnostic(&parse(broken).unwrap_err(), broken));
}
