use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use super::RegistryError;
use crate::data::Document;

/// A scalar or string setting value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Bool,
    Int,
    Real,
    Str,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Bool => "bool",
            ValueType::Int => "int",
            ValueType::Real => "real",
            ValueType::Str => "string",
        })
    }
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Bool(_) => ValueType::Bool,
            Value::Int(_) => ValueType::Int,
            Value::Real(_) => ValueType::Real,
            Value::Str(_) => ValueType::Str,
        }
    }

    /// Converts to `ty`, widening integers to reals.
    fn coerce(self, key: &str, ty: ValueType) -> Result<Value, RegistryError> {
        match (self, ty) {
            (Value::Int(i), ValueType::Real) => Ok(Value::Real(i as f64)),
            (v, t) if v.value_type() == t => Ok(v),
            (v, t) => Err(RegistryError::SettingType { key: key.to_owned(), expected: t, found: v.value_type() }),
        }
    }

    /// From a JSON scalar; `None` for arrays, objects and null.
    pub fn from_json(v: &serde_json::Value) -> Option<Value> {
        match v {
            serde_json::Value::Bool(b) => Some(Value::Bool(*b)),
            serde_json::Value::Number(n) => n.as_i64().map(Value::Int).or_else(|| n.as_f64().map(Value::Real)),
            serde_json::Value::String(s) => Some(Value::Str(s.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x:?}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<i32> for Value {
    fn from(v: i32) -> Self {
        Value::Int(v.into())
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

/// Schema entry: key, default value (which also fixes the type) and a one-line description.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingSpec {
    pub key: String,
    pub default: Value,
    pub description: String,
}

impl SettingSpec {
    pub fn new(key: &str, default: impl Into<Value>, description: &str) -> Self {
        Self { key: key.to_owned(), default: default.into(), description: description.to_owned() }
    }
}

/// Typed key/value settings with a one-way lock.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "SettingsRaw", into = "SettingsRaw")]
pub struct Settings {
    values: Vec<(String, Value)>,
    locked: AtomicBool,
}

#[derive(Serialize, Deserialize)]
struct SettingsRaw {
    values: serde_json::Map<String, serde_json::Value>,
    locked: bool,
}

impl TryFrom<SettingsRaw> for Settings {
    type Error = String;

    fn try_from(r: SettingsRaw) -> Result<Self, String> {
        let values = r
            .values
            .into_iter()
            .map(|(k, v)| Value::from_json(&v).map(|v| (k.clone(), v)).ok_or_else(|| format!("setting {k:?} is not a scalar")))
            .collect::<Result<_, _>>()?;
        Ok(Self { values, locked: AtomicBool::new(r.locked) })
    }
}

impl From<Settings> for SettingsRaw {
    fn from(s: Settings) -> Self {
        SettingsRaw { values: s.to_map(), locked: s.is_locked() }
    }
}

impl Clone for Settings {
    fn clone(&self) -> Self {
        Self { values: self.values.clone(), locked: AtomicBool::new(self.is_locked()) }
    }
}

impl PartialEq for Settings {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.is_locked() == other.is_locked()
    }
}

impl Document for Settings {
    const KIND: &'static str = "settings";
}

impl Settings {
    /// Schema defaults overridden by `overrides`; unknown keys and ill-typed values are rejected.
    pub fn from_schema(kind: &str, name: &str, schema: &[SettingSpec], overrides: &[(&str, Value)]) -> Result<Self, RegistryError> {
        let mut values: Vec<(String, Value)> = schema.iter().map(|s| (s.key.clone(), s.default.clone())).collect();
        for (key, v) in overrides {
            let Some(slot) = values.iter_mut().find(|(k, _)| k == key) else {
                return Err(RegistryError::UnknownSetting {
                    kind: kind.to_owned(),
                    name: name.to_owned(),
                    key: (*key).to_owned(),
                    valid: schema.iter().map(|s| s.key.clone()).collect(),
                });
            };
            slot.1 = v.clone().coerce(key, slot.1.value_type())?;
        }
        Ok(Self { values, locked: AtomicBool::new(false) })
    }

    pub fn is_locked(&self) -> bool {
        self.locked.load(Ordering::Acquire)
    }

    pub(crate) fn lock(&self) {
        self.locked.store(true, Ordering::Release);
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(|(k, _)| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Replaces an existing value; the type must match and the settings must be unlocked.
    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> Result<(), RegistryError> {
        if self.is_locked() {
            return Err(RegistryError::Locked(key.to_owned()));
        }
        let valid: Vec<String> = self.keys().map(str::to_owned).collect();
        let Some(slot) = self.values.iter_mut().find(|(k, _)| k == key) else {
            return Err(RegistryError::UnknownSetting { kind: String::new(), name: String::new(), key: key.to_owned(), valid });
        };
        slot.1 = value.into().coerce(key, slot.1.value_type())?;
        Ok(())
    }

    fn typed<'a, T>(&'a self, key: &str, ty: ValueType, f: impl Fn(&'a Value) -> Option<T>) -> Result<T, RegistryError> {
        let v = self.get(key).ok_or_else(|| RegistryError::UnknownSetting {
            kind: String::new(),
            name: String::new(),
            key: key.to_owned(),
            valid: self.keys().map(str::to_owned).collect(),
        })?;
        f(v).ok_or_else(|| RegistryError::SettingType { key: key.to_owned(), expected: ty, found: v.value_type() })
    }

    pub fn bool(&self, key: &str) -> Result<bool, RegistryError> {
        self.typed(key, ValueType::Bool, |v| if let Value::Bool(b) = v { Some(*b) } else { None })
    }

    pub fn int(&self, key: &str) -> Result<i64, RegistryError> {
        self.typed(key, ValueType::Int, |v| if let Value::Int(i) = v { Some(*i) } else { None })
    }

    pub fn real(&self, key: &str) -> Result<f64, RegistryError> {
        self.typed(key, ValueType::Real, |v| match v {
            Value::Real(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        })
    }

    pub fn str(&self, key: &str) -> Result<&str, RegistryError> {
        self.typed(key, ValueType::Str, |v| if let Value::Str(s) = v { Some(s.as_str()) } else { None })
    }

    /// Integer setting that must be in `min..=max`.
    pub fn int_in(&self, key: &str, min: i64, max: i64) -> Result<i64, RegistryError> {
        let v = self.int(key)?;
        if v < min || v > max {
            return Err(RegistryError::InvalidSetting { key: key.to_owned(), reason: format!("{v} is outside {min}..={max}") });
        }
        Ok(v)
    }

    /// Values as an ordered JSON object.
    pub fn to_map(&self) -> serde_json::Map<String, serde_json::Value> {
        self.values.iter().map(|(k, v)| (k.clone(), serde_json::to_value(v).expect("scalars serialize"))).collect()
    }
}
