//! Thread programs, their compilation to LTSs, and the algorithm catalog.

pub mod catalog;
mod compile;
pub mod ir;
mod validate;

use std::collections::HashMap;

pub use catalog::{algorithm_catalog, catalog_entries, CatalogEntry};
pub use compile::{compile_thread, thread_alphabet};
pub use ir::ThreadProgram;
pub use validate::{validate_thread_lts, Violation};

use crate::error::{Error, Result};
use crate::lts::{RegisterId, Value};
use crate::registers::{RegisterConfig, RegisterKind};

/// A scalar register (`len == None`) or an array of registers `name[0..len]`
/// sharing one domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterArray {
    pub name: String,
    pub len: Option<usize>,
    pub domain: Vec<Value>,
    pub initial: Vec<Value>,
}

impl RegisterArray {
    pub fn scalar(name: &str, domain: Vec<Value>, initial: Value) -> Self {
        Self { name: name.into(), len: None, domain, initial: vec![initial] }
    }

    pub fn array(name: &str, len: usize, domain: Vec<Value>, initial: Vec<Value>) -> Self {
        Self { name: name.into(), len: Some(len), domain, initial }
    }

    pub fn booleans(name: &str, len: usize, initial: bool) -> Self {
        Self::array(name, len, vec![0, 1], vec![initial as Value; len])
    }

    fn element_name(&self, i: usize) -> String {
        match self.len {
            None => self.name.clone(),
            Some(_) => format!("{}[{i}]", self.name),
        }
    }
}

/// Flattened register layout: every array element gets its own id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterTable {
    arrays: Vec<(String, RegisterId, Option<usize>)>,
    by_name: HashMap<String, usize>,
    names: Vec<String>,
    domains: Vec<Vec<Value>>,
    initial: Vec<Value>,
}

impl RegisterTable {
    pub fn new(arrays: &[RegisterArray]) -> Result<Self> {
        let mut t = RegisterTable {
            arrays: Vec::new(),
            by_name: HashMap::new(),
            names: Vec::new(),
            domains: Vec::new(),
            initial: Vec::new(),
        };
        for a in arrays {
            let count = a.len.unwrap_or(1);
            if a.initial.len() != count {
                return Err(Error::Config(format!("register array {}: {} initial values for {count} registers", a.name, a.initial.len())));
            }
            if t.by_name.insert(a.name.clone(), t.arrays.len()).is_some() {
                return Err(Error::Config(format!("duplicate register array {}", a.name)));
            }
            t.arrays.push((a.name.clone(), t.names.len() as RegisterId, a.len));
            for i in 0..count {
                let name = a.element_name(i);
                RegisterConfig::new(name.clone(), a.domain.clone(), a.initial[i], RegisterKind::Atomic).validate()?;
                t.names.push(name);
                t.domains.push(a.domain.clone());
                t.initial.push(a.initial[i]);
            }
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, r: RegisterId) -> &str {
        &self.names[r as usize]
    }

    pub fn domain(&self, r: RegisterId) -> &[Value] {
        &self.domains[r as usize]
    }

    pub fn id(&self, name: &str) -> Option<RegisterId> {
        self.names.iter().position(|n| n == name).map(|i| i as RegisterId)
    }

    pub(crate) fn array_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub(crate) fn array_name(&self, array: usize) -> &str {
        &self.arrays[array].0
    }

    pub(crate) fn is_array(&self, array: usize) -> bool {
        self.arrays[array].2.is_some()
    }

    pub(crate) fn resolve(&self, array: usize, index: Option<Value>) -> Option<RegisterId> {
        let (_, base, len) = &self.arrays[array];
        match (len, index) {
            (None, None) => Some(*base),
            (Some(n), Some(i)) if i >= 0 && (i as usize) < *n => Some(base + i as RegisterId),
            _ => None,
        }
    }

    /// Register configurations of the given kind, indexed by register id.
    pub fn configs(&self, kind: RegisterKind) -> Vec<RegisterConfig> {
        (0..self.len())
            .map(|r| RegisterConfig::new(self.names[r].clone(), self.domains[r].clone(), self.initial[r], kind))
            .collect()
    }
}

/// A catalog entry instantiated for a thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub variant: String,
    pub threads: usize,
    pub registers: Vec<RegisterArray>,
    pub programs: Vec<ThreadProgram>,
}

impl AlgorithmSpec {
    pub fn table(&self) -> Result<RegisterTable> {
        RegisterTable::new(&self.registers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_flattens_arrays() {
        let t = RegisterTable::new(&[
            RegisterArray::booleans("flag", 2, false),
            RegisterArray::scalar("turn", vec![0, 1], 0),
        ])
        .unwrap();
        assert_eq!(t.names(), ["flag[0]", "flag[1]", "turn"]);
        assert_eq!(t.resolve(0, Some(1)), Some(1));
        assert_eq!(t.resolve(0, Some(2)), None);
        assert_eq!(t.resolve(1, None), Some(2));
        assert_eq!(t.id("turn"), Some(2));
        assert_eq!(t.configs(RegisterKind::Safe)[2].domain, vec![0, 1]);
    }

    #[test]
    fn table_rejects_bad_layouts() {
        assert!(RegisterTable::new(&[RegisterArray::scalar("x", vec![0, 1], 2)]).is_err());
        assert!(RegisterTable::new(&[
            RegisterArray::scalar("x", vec![0, 1], 0),
            RegisterArray::scalar("x", vec![0, 1], 0)
        ])
        .is_err());
    }
}
