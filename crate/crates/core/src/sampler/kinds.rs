use std::collections::BTreeMap;

use crate::lang::ast::{Expr, Program, StatementKind};
use crate::lang::{parse, Span};
use crate::specifier::{builtin_defaults, DefaultSource};

use super::error::ProgramError;

/// Kinds every scenario can use, written in the scenario language itself.
pub const PRELUDE: &str = r#"
kind Ball(Object):
    shape: "sphere"
    width: 0.5
    length: 0.5
    height: 0.5
kind Plane(Object):
    width: 1
    length: 2
    height: 0.4
kind Chair(Object):
    shape: "builtin/chair"
    width: 0.5
    length: 0.5
    height: 1
kind Table(Object):
    shape: "builtin/table"
    width: 1.2
    length: 0.8
    height: 0.75
kind Car(Object):
    width: 1.8
    length: 4.5
    height: 1.5
kind Robot(Object):
    shape: "cylinder"
    width: 0.34
    length: 0.34
    height: 0.09
"#;

pub const ROOT_KIND: &str = "Object";

#[derive(Debug, Clone)]
pub struct KindDef {
    pub name: String,
    pub parent: String,
    pub defaults: Vec<(String, Expr)>,
}

#[derive(Debug, Clone)]
pub struct KindRegistry {
    kinds: BTreeMap<String, KindDef>,
}

impl KindRegistry {
    pub fn with_prelude() -> KindRegistry {
        let mut reg = KindRegistry { kinds: BTreeMap::new() };
        let prelude = parse(PRELUDE).expect("prelude parses");
        reg.add_program(&prelude).expect("prelude is well-formed");
        reg
    }

    /// Prelude plus every kind defined in `program`.
    pub fn for_program(program: &Program) -> Result<KindRegistry, ProgramError> {
        let mut reg = KindRegistry::with_prelude();
        reg.add_program(program)?;
        Ok(reg)
    }

    fn add_program(&mut self, program: &Program) -> Result<(), ProgramError> {
        for s in &program.statements {
            if let StatementKind::KindDefinition { name, parent, defaults } = &s.kind {
                let defaults = defaults.iter().map(|d| (d.property.clone(), d.value.clone())).collect();
                self.define(name, parent.as_deref().unwrap_or(ROOT_KIND), defaults, s.span)?;
            }
        }
        Ok(())
    }

    pub fn define(&mut self, name: &str, parent: &str, defaults: Vec<(String, Expr)>, span: Span) -> Result<(), ProgramError> {
        if name == ROOT_KIND {
            return Err(ProgramError::new("the root kind Object cannot be redefined", span));
        }
        if !self.contains(parent) {
            return Err(ProgramError::new(format!("unknown parent kind '{parent}'"), span));
        }
        self.kinds.insert(
            name.to_string(),
            KindDef {
                name: name.to_string(),
                parent: parent.to_string(),
                defaults,
            },
        );
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        name == ROOT_KIND || self.kinds.contains_key(name)
    }

    /// Default source for every property, most-derived kind first.
    pub fn defaults(&self, kind: &str, span: Span) -> Result<BTreeMap<String, DefaultSource>, ProgramError> {
        let mut chain = Vec::new();
        let mut cur = kind;
        while cur != ROOT_KIND {
            let def = self
                .kinds
                .get(cur)
                .ok_or_else(|| ProgramError::new(format!("unknown kind '{cur}'"), span))?;
            if chain.len() > self.kinds.len() {
                return Err(ProgramError::new(format!("kind '{kind}' inherits from itself"), span));
            }
            chain.push(def);
            cur = &def.parent;
        }
        let mut out = builtin_defaults();
        for def in chain.into_iter().rev() {
            for (p, e) in &def.defaults {
                out.insert(p.clone(), DefaultSource::Expr(e.clone()));
            }
        }
        Ok(out)
    }
}
