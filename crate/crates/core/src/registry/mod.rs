//! Factory registry mapping algorithm kinds and implementation names to
//! constructible, settings-carrying instances.
//!
//! A kind is a marker type implementing [`AlgorithmKind`]; its `Interface`
//! is the trait object every implementation provides. Built-in kinds live in
//! [`kinds`]. A new kind is created by defining a marker and registering the
//! first implementation under its name.

mod builtin;
pub mod kinds;
mod settings;

use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use thiserror::Error;

pub use settings::{SettingSpec, Settings, Value, ValueType};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("{kind}/{name} is already registered")]
    Duplicate { kind: String, name: String },
    #[error("unknown algorithm kind {kind:?}; available kinds: {}", available.join(", "))]
    UnknownKind { kind: String, available: Vec<String> },
    #[error("unknown {kind} implementation {name:?}; available: {}", available.join(", "))]
    UnknownName { kind: String, name: String, available: Vec<String> },
    #[error("no default implementation registered for {0}")]
    NoDefault(String),
    #[error("unknown setting {key:?} for {kind}/{name}; valid keys: {}", valid.join(", "))]
    UnknownSetting { kind: String, name: String, key: String, valid: Vec<String> },
    #[error("setting {key:?} expects {expected}, got {found}")]
    SettingType { key: String, expected: ValueType, found: ValueType },
    #[error("setting {key:?} is invalid: {reason}")]
    InvalidSetting { key: String, reason: String },
    #[error("settings are locked after run; cannot change {0:?}")]
    Locked(String),
    #[error("kind {0:?} is registered with a different interface type")]
    InterfaceMismatch(String),
}

/// Marker for an algorithm kind.
pub trait AlgorithmKind: Send + Sync + 'static {
    /// Registry key, e.g. `"qubit_mapper"`.
    const NAME: &'static str;
    type Interface: ?Sized + Send + Sync + 'static;
}

type Factory<K> = Arc<dyn Fn() -> Box<<K as AlgorithmKind>::Interface> + Send + Sync>;

struct Entry {
    schema: Arc<Vec<SettingSpec>>,
    factory: Box<dyn Any + Send + Sync>,
}

#[derive(Default)]
struct Registry {
    kinds: BTreeMap<String, BTreeMap<String, Entry>>,
    defaults: BTreeMap<String, String>,
}

static REGISTRY: LazyLock<RwLock<Registry>> = LazyLock::new(|| {
    let mut r = Registry::default();
    builtin::register_all(&mut r);
    RwLock::new(r)
});

impl Registry {
    fn insert<K: AlgorithmKind>(
        &mut self,
        name: &str,
        schema: Vec<SettingSpec>,
        is_default: bool,
        factory: Factory<K>,
    ) -> Result<(), RegistryError> {
        let impls = self.kinds.entry(K::NAME.to_owned()).or_default();
        if let Some(other) = impls.values().next() {
            if !other.factory.is::<Factory<K>>() {
                return Err(RegistryError::InterfaceMismatch(K::NAME.to_owned()));
            }
        }
        if impls.contains_key(name) {
            return Err(RegistryError::Duplicate { kind: K::NAME.to_owned(), name: name.to_owned() });
        }
        impls.insert(name.to_owned(), Entry { schema: Arc::new(schema), factory: Box::new(factory) });
        if is_default {
            if let Some(old) = self.defaults.insert(K::NAME.to_owned(), name.to_owned()) {
                log::warn!("default {} implementation changed from {old} to {name}", K::NAME);
            }
        }
        Ok(())
    }
}

fn read() -> std::sync::RwLockReadGuard<'static, Registry> {
    REGISTRY.read().unwrap_or_else(|e| e.into_inner())
}

/// Registers an implementation of kind `K`. The first registration under a
/// fresh kind name creates the kind.
pub fn register<K: AlgorithmKind>(
    name: &str,
    schema: Vec<SettingSpec>,
    is_default: bool,
    constructor: impl Fn() -> Box<K::Interface> + Send + Sync + 'static,
) -> Result<(), RegistryError> {
    let mut r = REGISTRY.write().unwrap_or_else(|e| e.into_inner());
    r.insert::<K>(name, schema, is_default, Arc::new(constructor))
}

/// Instantiates `name` (or the default) with `settings` applied over the schema defaults.
pub fn create<K: AlgorithmKind>(name: Option<&str>, settings: &[(&str, Value)]) -> Result<Instance<K>, RegistryError> {
    let r = read();
    let impls = r.kinds.get(K::NAME).ok_or_else(|| RegistryError::UnknownKind {
        kind: K::NAME.to_owned(),
        available: r.kinds.keys().cloned().collect(),
    })?;
    let name = match name {
        Some(n) => n.to_owned(),
        None => r.defaults.get(K::NAME).cloned().ok_or_else(|| RegistryError::NoDefault(K::NAME.to_owned()))?,
    };
    let entry = impls.get(&name).ok_or_else(|| RegistryError::UnknownName {
        kind: K::NAME.to_owned(),
        name: name.clone(),
        available: impls.keys().cloned().collect(),
    })?;
    let factory = entry.factory.downcast_ref::<Factory<K>>().ok_or_else(|| RegistryError::InterfaceMismatch(K::NAME.to_owned()))?;
    let settings = Settings::from_schema(K::NAME, &name, &entry.schema, settings)?;
    let implementation = factory();
    Ok(Instance { name, settings, implementation })
}

/// One row of [`list`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImplementationInfo {
    pub name: String,
    pub is_default: bool,
    pub schema: Vec<SettingSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Listing {
    pub found: bool,
    pub implementations: Vec<ImplementationInfo>,
}

/// Implementations of `kind` in name order; `found` is false for an unknown kind.
pub fn list(kind: &str) -> Listing {
    let r = read();
    let Some(impls) = r.kinds.get(kind) else {
        return Listing { found: false, implementations: Vec::new() };
    };
    let default = r.defaults.get(kind);
    let implementations = impls
        .iter()
        .map(|(name, e)| ImplementationInfo {
            name: name.clone(),
            is_default: default == Some(name),
            schema: e.schema.as_ref().clone(),
        })
        .collect();
    Listing { found: true, implementations }
}

/// Every registered kind name.
pub fn list_kinds() -> Vec<String> {
    read().kinds.keys().cloned().collect()
}

/// A configured implementation of kind `K`.
///
/// Settings can be changed until the first run and are locked from then on.
pub struct Instance<K: AlgorithmKind> {
    name: String,
    settings: Settings,
    implementation: Box<K::Interface>,
}

impl<K: AlgorithmKind> fmt::Debug for Instance<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance").field("kind", &K::NAME).field("name", &self.name).field("settings", &self.settings).finish()
    }
}

impl<K: AlgorithmKind> Instance<K> {
    pub fn kind(&self) -> &'static str {
        K::NAME
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    /// Mutable settings; writes fail once the instance has run.
    pub fn settings_mut(&mut self) -> &mut Settings {
        &mut self.settings
    }

    /// Runs `f` against the implementation, locking the settings first.
    ///
    /// Kind-specific `run` methods are thin wrappers over this.
    pub fn invoke<R>(&self, f: impl FnOnce(&K::Interface, &Settings) -> R) -> R {
        self.settings.lock();
        f(&self.implementation, &self.settings)
    }

    /// `{"impl": name, "settings": {...}}` record for provenance output.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({ "impl": self.name, "settings": self.settings.to_map() })
    }
}
