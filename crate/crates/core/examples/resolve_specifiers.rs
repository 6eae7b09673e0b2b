//! Which specifier provides each property, and in what order they run.

use scenium::lang::ast::{ExprKind, StatementKind};
use scenium::lang::{parse, sexpr_specifier};
use scenium::specifier::{builtin_defaults, resolve, Step};

fn main() {
    let src = "ego = new Chair below air_cube, on floor, facing 30 deg\n\
               bad = new Ball at (0, 0, 0), at (1, 1, 1)\n";
    let program = parse(src).unwrap();
    for statement in &program.statements {
        let value = match &statement.kind {
            StatementKind::Assignment { value, .. } | StatementKind::EgoAssignment(value) => value,
            _ => continue,
        };
        let ExprKind::New(object) = &value.kind else { continue };
        println!("new {}:", object.kind);
        match resolve(&object.specifiers, &builtin_defaults()) {
            Ok(plan) => {
                for step in &plan.steps {
                    match step {
                        Step::Specifier { index, sets, modifies } => println!(
                            "  {} sets {sets:?} modifies {modifies:?}",
                            sexpr_specifier(&object.specifiers[*index])
                        ),
                        Step::Default(p) => println!("  default {p}"),
                    }
                }
            }
            Err(e) => println!("  error: {e}"),
        }
    }
}
