//! The two-layer QRFA label schema and the event classes built from it.
//!
//! Core labels split utterances by role: the user issues **Q**ueries and
//! **F**eedback, the agent issues **R**equests and **A**nswers. Each core
//! label is refined by a fixed set of sublabels.
//!
//! Variants are declared in alphabetical order so that the derived `Ord`
//! matches lexicographic order on label names.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::LabelError;

/// Conversation participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Agent,
    User,
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Speaker::Agent => "agent",
            Speaker::User => "user",
        })
    }
}

impl FromStr for Speaker {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "user" => Ok(Speaker::User),
            "agent" => Ok(Speaker::Agent),
            other => Err(LabelError::UnknownSpeaker(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoreLabel {
    /// Answer
    A,
    /// Feedback
    F,
    /// Query
    Q,
    /// Request
    R,
}

impl CoreLabel {
    pub const ALL: [CoreLabel; 4] = [CoreLabel::Q, CoreLabel::R, CoreLabel::F, CoreLabel::A];

    /// The participant expected to produce this label.
    pub fn speaker(self) -> Speaker {
        match self {
            CoreLabel::Q | CoreLabel::F => Speaker::User,
            CoreLabel::R | CoreLabel::A => Speaker::Agent,
        }
    }

    pub fn sublabels(self) -> &'static [SubLabel] {
        match self {
            CoreLabel::Q => &[SubLabel::Information, SubLabel::Prompt],
            CoreLabel::F => &[SubLabel::Positive, SubLabel::Negative],
            CoreLabel::R => &[SubLabel::Offer, SubLabel::Understand],
            CoreLabel::A => &[SubLabel::Results, SubLabel::Backchannel, SubLabel::Empty],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoreLabel::A => "A",
            CoreLabel::F => "F",
            CoreLabel::Q => "Q",
            CoreLabel::R => "R",
        }
    }
}

impl fmt::Display for CoreLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoreLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Q" => Ok(CoreLabel::Q),
            "R" => Ok(CoreLabel::R),
            "F" => Ok(CoreLabel::F),
            "A" => Ok(CoreLabel::A),
            other => Err(LabelError::UnknownCore(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubLabel {
    Backchannel,
    Empty,
    Information,
    Negative,
    Offer,
    Positive,
    Prompt,
    Results,
    Understand,
}

impl SubLabel {
    /// The only core label this sublabel may refine.
    pub fn parent(self) -> CoreLabel {
        match self {
            SubLabel::Information | SubLabel::Prompt => CoreLabel::Q,
            SubLabel::Positive | SubLabel::Negative => CoreLabel::F,
            SubLabel::Offer | SubLabel::Understand => CoreLabel::R,
            SubLabel::Results | SubLabel::Backchannel | SubLabel::Empty => CoreLabel::A,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubLabel::Backchannel => "Backchannel",
            SubLabel::Empty => "Empty",
            SubLabel::Information => "Information",
            SubLabel::Negative => "Negative",
            SubLabel::Offer => "Offer",
            SubLabel::Positive => "Positive",
            SubLabel::Prompt => "Prompt",
            SubLabel::Results => "Results",
            SubLabel::Understand => "Understand",
        }
    }
}

impl fmt::Display for SubLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "Backchannel" => SubLabel::Backchannel,
            "Empty" => SubLabel::Empty,
            "Information" => SubLabel::Information,
            "Negative" => SubLabel::Negative,
            "Offer" => SubLabel::Offer,
            "Positive" => SubLabel::Positive,
            "Prompt" => SubLabel::Prompt,
            "Results" => SubLabel::Results,
            "Understand" => SubLabel::Understand,
            other => return Err(LabelError::UnknownSub(other.to_string())),
        })
    }
}

/// A QRFA label, optionally refined by a sublabel. Written `Q` or `Q:Information`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    core: CoreLabel,
    sub: Option<SubLabel>,
}

impl Label {
    pub const fn core_only(core: CoreLabel) -> Self {
        Label { core, sub: None }
    }

    pub fn new(core: CoreLabel, sub: Option<SubLabel>) -> Result<Self, LabelError> {
        if let Some(sub) = sub {
            if sub.parent() != core {
                return Err(LabelError::InvalidPair { core, sub });
            }
        }
        Ok(Label { core, sub })
    }

    pub fn core(&self) -> CoreLabel {
        self.core
    }

    pub fn sub(&self) -> Option<SubLabel> {
        self.sub
    }

    /// Drops the sublabel.
    pub fn to_core(self) -> Label {
        Label::core_only(self.core)
    }

    pub fn at_layer(self, layer: Layer) -> Label {
        match layer {
            Layer::Core => self.to_core(),
            Layer::Fine => self,
        }
    }

    pub fn speaker(&self) -> Speaker {
        self.core.speaker()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sub {
            Some(sub) => write!(f, "{}:{}", self.core, sub),
            None => write!(f, "{}", self.core),
        }
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().split_once(':') {
            Some((core, sub)) => Label::new(core.parse()?, Some(sub.parse()?)),
            None => Ok(Label::core_only(s.parse()?)),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which layer of the schema a log or model speaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Core,
    Fine,
}

impl Layer {
    /// Whether `label` may appear in a log or model at this layer.
    pub fn admits(self, label: &Label) -> bool {
        match self {
            Layer::Core => label.sub.is_none(),
            Layer::Fine => true,
        }
    }

    /// The coarser of two layers.
    pub fn meet(self, other: Layer) -> Layer {
        if self == Layer::Core || other == Layer::Core {
            Layer::Core
        } else {
            Layer::Fine
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Core => "core",
            Layer::Fine => "fine",
        })
    }
}

impl FromStr for Layer {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "core" => Ok(Layer::Core),
            "fine" => Ok(Layer::Fine),
            other => Err(LabelError::UnknownLayer(other.to_string())),
        }
    }
}

/// An activity in an event log or model. `Start` and `End` are synthetic
/// markers that never occur inside a stored trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventClass {
    Start,
    Label(Label),
    End,
}

impl EventClass {
    pub const START_NAME: &'static str = "START";
    pub const END_NAME: &'static str = "END";

    pub fn label(&self) -> Option<Label> {
        match self {
            EventClass::Label(l) => Some(*l),
            _ => None,
        }
    }

    pub fn is_marker(&self) -> bool {
        !matches!(self, EventClass::Label(_))
    }

    pub fn at_layer(self, layer: Layer) -> EventClass {
        match self {
            EventClass::Label(l) => EventClass::Label(l.at_layer(layer)),
            other => other,
        }
    }
}

impl From<CoreLabel> for Label {
    fn from(core: CoreLabel) -> Self {
        Label::core_only(core)
    }
}

impl From<Label> for EventClass {
    fn from(label: Label) -> Self {
        EventClass::Label(label)
    }
}

impl From<CoreLabel> for EventClass {
    fn from(core: CoreLabel) -> Self {
        EventClass::Label(Label::core_only(core))
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventClass::Start => f.write_str(Self::START_NAME),
            EventClass::End => f.write_str(Self::END_NAME),
            EventClass::Label(l) => l.fmt(f),
        }
    }
}

impl FromStr for EventClass {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            Self::START_NAME => Ok(EventClass::Start),
            Self::END_NAME => Ok(EventClass::End),
            other => Ok(EventClass::Label(other.parse()?)),
        }
    }
}

impl Serialize for EventClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EventClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
