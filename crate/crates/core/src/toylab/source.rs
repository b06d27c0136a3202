use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::machine::MACHINE_ID;
use super::oracle::{Budget, OracleTable, OutputFilter};
use crate::complexity::{ComplexityEstimate, ComplexitySource, Mode};
use crate::error::{Error, Result};
use crate::model::{canonicalize, ByteString, StringList};

/// The toy machine as a [`ComplexitySource`]: every quantity is the exact
/// bounded complexity, and anything no program within budget produces is
/// [`Error::Absent`].
///
/// Lists are produced natively as element sequences, so pair and list
/// complexities are looked up directly rather than through a joint encoding.
/// Tables are built lazily, one per condition.
#[derive(Debug)]
pub struct ToyOracle {
    id: String,
    budget: Budget,
    filter: OutputFilter,
    tables: Mutex<HashMap<ByteString, Arc<OracleTable>>>,
}

impl ToyOracle {
    pub fn new(budget: Budget, filter: OutputFilter) -> Result<Self> {
        budget.validate()?;
        Ok(ToyOracle {
            id: format!("{MACHINE_ID} L={} S={}", budget.max_program_bits, budget.max_steps),
            budget,
            filter,
            tables: Mutex::new(HashMap::new()),
        })
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn table(&self, condition: &ByteString) -> Result<Arc<OracleTable>> {
        if let Some(t) = self.tables.lock().unwrap_or_else(|e| e.into_inner()).get(condition) {
            return Ok(t.clone());
        }
        let t = Arc::new(OracleTable::build(condition, self.budget, self.filter)?);
        self.tables
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(condition.clone(), t.clone());
        Ok(t)
    }

    fn lookup(&self, output: &[ByteString], condition: &ByteString) -> Result<ComplexityEstimate> {
        let bits = self.table(condition)?.complexity(output).ok_or_else(|| {
            Error::Absent(format!(
                "no program of at most {} bits outputs {output:?} given {condition:?}",
                self.budget.max_program_bits
            ))
        })?;
        Ok(ComplexityEstimate::new(
            bits as f64,
            self.id.clone(),
            Mode::ExactBounded,
        ))
    }
}

impl ComplexitySource for ToyOracle {
    fn id(&self) -> &str {
        &self.id
    }

    fn complexity(&self, bytes: &[u8]) -> Result<ComplexityEstimate> {
        self.lookup(&[ByteString::from(bytes)], &ByteString::empty())
    }

    fn conditional(&self, target: &[u8], condition: &[u8]) -> Result<ComplexityEstimate> {
        self.lookup(&[ByteString::from(target)], &ByteString::from(condition))
    }

    fn pair_complexity(&self, a: &[u8], b: &[u8]) -> Result<ComplexityEstimate> {
        let list = canonicalize([a, b])?;
        self.list_complexity(&list)
    }

    fn list_complexity(&self, list: &StringList) -> Result<ComplexityEstimate> {
        self.lookup(list.elements(), &ByteString::empty())
    }

    fn list_conditional(&self, list: &StringList, x: &ByteString) -> Result<ComplexityEstimate> {
        self.lookup(list.elements(), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::emax;

    fn bits(s: &str) -> ByteString {
        ByteString::from_bits(s).unwrap()
    }

    #[test]
    fn exact_values_and_absence() {
        let o = ToyOracle::new(Budget::new(18, 10_000), OutputFilter::lists(3, 6)).unwrap();
        let x = bits("0110");
        let c = o.complexity(x.as_bytes()).unwrap();
        assert_eq!((c.bits, c.mode), (11.0, Mode::ExactBounded));
        assert_eq!(o.conditional(x.as_bytes(), x.as_bytes()).unwrap().bits, 5.0);
        let far = bits("101101");
        let y = bits("010011");
        let list = canonicalize([x.clone(), far, y]).unwrap();
        assert!(matches!(o.list_complexity(&list), Err(Error::Absent(_))));
    }

    #[test]
    fn drives_the_list_estimators() {
        let o = ToyOracle::new(Budget::new(20, 10_000), OutputFilter::lists(2, 4)).unwrap();
        let x = bits("0110");
        let list = canonicalize([x.clone(), x.clone()]).unwrap();
        let r = emax(&list, &o).unwrap();
        assert!(r.value <= 11.0, "{r:?}");
        let pair = o.pair_complexity(x.as_bytes(), bits("1").as_bytes()).unwrap();
        // LIT "1", SEP, LIT "0110", HALT
        assert_eq!(pair.bits, 20.0);
    }
}
