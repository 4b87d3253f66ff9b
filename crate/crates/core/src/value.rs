use std::fmt;

use serde::{Deserialize, Serialize};

/// One of the four quadrants an object can occupy in a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Location {
    #[serde(rename = "top left")]
    TopLeft,
    #[serde(rename = "top right")]
    TopRight,
    #[serde(rename = "bottom left")]
    BottomLeft,
    #[serde(rename = "bottom right")]
    BottomRight,
}

impl Location {
    pub const ALL: [Location; 4] = [
        Location::TopLeft,
        Location::TopRight,
        Location::BottomLeft,
        Location::BottomRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Location::TopLeft => "top left",
            Location::TopRight => "top right",
            Location::BottomLeft => "bottom left",
            Location::BottomRight => "bottom right",
        }
    }

    pub fn from_name(name: &str) -> Option<Location> {
        Location::ALL.into_iter().find(|l| l.name() == name)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An object attribute that operators can read or constrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Category,
    Identity,
    ViewAngle,
    Location,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [
        Attribute::Category,
        Attribute::Identity,
        Attribute::ViewAngle,
        Attribute::Location,
    ];

    /// The phrase used for this attribute in instructions.
    pub fn phrase(self) -> &'static str {
        match self {
            Attribute::Category => "category",
            Attribute::Identity => "identity",
            Attribute::ViewAngle => "view angle",
            Attribute::Location => "location",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Attribute::Category => "category",
            Attribute::Identity => "identity",
            Attribute::ViewAngle => "view_angle",
            Attribute::Location => "location",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phrase())
    }
}

/// Identity of a stimulus: a specific object within a category.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IdentityValue {
    pub category: String,
    pub index: u32,
}

/// A value flowing along a task-graph edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Bool(bool),
    Category(String),
    Location(Location),
    Identity(IdentityValue),
    ViewAngle(u32),
}

impl Value {
    /// The attribute this value belongs to, `None` for booleans.
    pub fn attribute(&self) -> Option<Attribute> {
        match self {
            Value::Bool(_) => None,
            Value::Category(_) => Some(Attribute::Category),
            Value::Location(_) => Some(Attribute::Location),
            Value::Identity(_) => Some(Attribute::Identity),
            Value::ViewAngle(_) => Some(Attribute::ViewAngle),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Category(c) => f.write_str(c),
            Value::Location(l) => f.write_str(l.name()),
            Value::Identity(id) => write!(f, "{} {}", id.category, id.index),
            Value::ViewAngle(a) => write!(f, "{a}"),
        }
    }
}

/// Returned when setting an attribute that already holds a different value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeConflict {
    pub attribute: Attribute,
    pub existing: Value,
    pub requested: Value,
}

/// A partial assignment of object attributes. `None` means unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttributeMap {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_angle: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

impl AttributeMap {
    pub fn is_empty(&self) -> bool {
        self.category.is_none() && self.identity.is_none() && self.view_angle.is_none() && self.location.is_none()
    }

    /// Reads an attribute. Identity needs both category and identity index.
    pub fn get(&self, attribute: Attribute) -> Option<Value> {
        match attribute {
            Attribute::Category => self.category.clone().map(Value::Category),
            Attribute::Identity => match (&self.category, self.identity) {
                (Some(category), Some(index)) => Some(Value::Identity(IdentityValue {
                    category: category.clone(),
                    index,
                })),
                _ => None,
            },
            Attribute::ViewAngle => self.view_angle.map(Value::ViewAngle),
            Attribute::Location => self.location.map(Value::Location),
        }
    }

    pub fn is_set(&self, attribute: Attribute) -> bool {
        match attribute {
            Attribute::Category => self.category.is_some(),
            Attribute::Identity => self.identity.is_some(),
            Attribute::ViewAngle => self.view_angle.is_some(),
            Attribute::Location => self.location.is_some(),
        }
    }

    /// Whether `value` could be assigned without contradicting this map.
    pub fn admits(&self, value: &Value) -> bool {
        match value {
            Value::Bool(_) => false,
            Value::Category(c) => self.category.as_ref().is_none_or(|x| x == c),
            Value::Identity(id) => {
                self.category.as_ref().is_none_or(|x| *x == id.category) && self.identity.is_none_or(|x| x == id.index)
            }
            Value::ViewAngle(a) => self.view_angle.is_none_or(|x| x == *a),
            Value::Location(l) => self.location.is_none_or(|x| x == *l),
        }
    }

    /// Whether the value of `value`'s attribute equals `value`.
    pub fn matches(&self, value: &Value) -> bool {
        value.attribute().and_then(|a| self.get(a)).is_some_and(|v| v == *value)
    }

    pub fn set(&mut self, value: &Value) -> Result<(), AttributeConflict> {
        if !self.admits(value) {
            let attribute = value.attribute().unwrap_or(Attribute::Category);
            return Err(AttributeConflict {
                attribute,
                existing: self
                    .get(attribute)
                    .or_else(|| self.get(Attribute::Category))
                    .unwrap_or(Value::Bool(false)),
                requested: value.clone(),
            });
        }
        match value {
            Value::Bool(_) => {}
            Value::Category(c) => self.category = Some(c.clone()),
            Value::Identity(id) => {
                self.category = Some(id.category.clone());
                self.identity = Some(id.index);
            }
            Value::ViewAngle(a) => self.view_angle = Some(*a),
            Value::Location(l) => self.location = Some(*l),
        }
        Ok(())
    }

    /// Overwrites an attribute regardless of its current value. Setting an
    /// identity also overwrites the category.
    pub fn force(&mut self, value: &Value) {
        match value {
            Value::Bool(_) => {}
            Value::Category(c) => {
                if self.category.as_ref() != Some(c) {
                    self.identity = None;
                }
                self.category = Some(c.clone());
            }
            Value::Identity(id) => {
                self.category = Some(id.category.clone());
                self.identity = Some(id.index);
            }
            Value::ViewAngle(a) => self.view_angle = Some(*a),
            Value::Location(l) => self.location = Some(*l),
        }
    }

    /// Attributes set in this map, as values.
    pub fn values(&self) -> Vec<Value> {
        let mut out = Vec::new();
        if let Some(c) = &self.category {
            out.push(Value::Category(c.clone()));
        }
        if let Some(v) = self.get(Attribute::Identity) {
            out.push(v);
        }
        if let Some(a) = self.view_angle {
            out.push(Value::ViewAngle(a));
        }
        if let Some(l) = self.location {
            out.push(Value::Location(l));
        }
        out
    }
}
