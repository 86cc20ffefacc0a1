//! Admission schemes: how the agent explores and whether delay is penalized.

use std::collections::BTreeMap;
use std::fmt;

use crate::policy::AgentConfig;
use crate::reward::EconomicParams;

pub trait AdmissionScheme: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Exploration strategy the agent samples from on exploratory steps.
    fn exploration<'a>(&self, agent: &'a AgentConfig) -> &'a str;

    /// Economics the reward is computed with.
    fn economics(&self, econ: &EconomicParams) -> EconomicParams;
}

/// Delay-penalized reward with the configured (Boltzmann by default) exploration.
#[derive(Debug, Default, Clone, Copy)]
pub struct DePsac;

impl AdmissionScheme for DePsac {
    fn name(&self) -> &'static str {
        "depsac"
    }

    fn exploration<'a>(&self, agent: &'a AgentConfig) -> &'a str {
        &agent.exploration
    }

    fn economics(&self, econ: &EconomicParams) -> EconomicParams {
        *econ
    }
}

/// Profit-only reward with uniform epsilon-greedy exploration.
#[derive(Debug, Default, Clone, Copy)]
pub struct Dsara;

impl AdmissionScheme for Dsara {
    fn name(&self) -> &'static str {
        "dsara"
    }

    fn exploration<'a>(&self, _agent: &'a AgentConfig) -> &'a str {
        "uniform"
    }

    fn economics(&self, econ: &EconomicParams) -> EconomicParams {
        EconomicParams {
            penalty_scale: 0.0,
            ..*econ
        }
    }
}

type SchemeCtor = fn() -> Box<dyn AdmissionScheme>;

#[derive(Clone)]
pub struct SchemeRegistry {
    entries: BTreeMap<&'static str, SchemeCtor>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, ctor: SchemeCtor) {
        self.entries.insert(name, ctor);
    }

    pub fn create(&self, name: &str) -> Option<Box<dyn AdmissionScheme>> {
        self.entries.get(name).map(|ctor| ctor())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("depsac", || Box::new(DePsac));
        r.register("dsara", || Box::new(Dsara));
        r
    }
}

impl fmt::Debug for SchemeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}
