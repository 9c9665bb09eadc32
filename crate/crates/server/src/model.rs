//! Persisted entities and the journal events that create and change them.

use std::collections::BTreeSet;

use kielo::constructs::CefrLevel;
use kielo::exercises::Exercise;
use kielo::learner::PlacementItem;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Learner,
    Teacher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: String,
    pub name: String,
    pub role: Role,
    #[serde(skip)]
    pub token: String,
    pub cefr: Option<CefrLevel>,
    pub placement_theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "group", rename_all = "snake_case")]
pub enum Visibility {
    Private,
    Group(String),
    Public,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub id: String,
    pub name: String,
    pub teacher: String,
    pub invited: BTreeSet<String>,
    /// Learners who accepted an invitation.
    pub members: BTreeSet<String>,
    pub stories: BTreeSet<String>,
}

/// One journal line. Replaying every event in order rebuilds the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    UserRegistered {
        id: String,
        name: String,
        role: Role,
        token: String,
    },
    CefrSet {
        user: String,
        level: CefrLevel,
    },
    StoryUploaded {
        id: String,
        owner: String,
        language: String,
        title: String,
        text: String,
    },
    VisibilitySet {
        story: String,
        visibility: Visibility,
    },
    SessionStarted {
        id: String,
        learner: String,
        story: String,
        seed: u64,
        density: usize,
        exercises: Vec<Exercise>,
    },
    Answered {
        session: String,
        exercise: usize,
        given: String,
        timestamp: u64,
    },
    HintRequested {
        session: String,
        exercise: usize,
        timestamp: u64,
    },
    GroupCreated {
        id: String,
        teacher: String,
        name: String,
    },
    Invited {
        group: String,
        learner: String,
    },
    InvitationAccepted {
        group: String,
        learner: String,
    },
    PlacementStarted {
        id: String,
        learner: String,
        language: String,
        bank: Vec<PlacementItem>,
    },
    PlacementAnswered {
        placement: String,
        given: String,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn visibility_wire_format() {
        assert_eq!(
            serde_json::to_value(Visibility::Private).unwrap(),
            json!({"type": "private"})
        );
        assert_eq!(
            serde_json::to_value(Visibility::Group("g4".into())).unwrap(),
            json!({"type": "group", "group": "g4"})
        );
        let v: Visibility = serde_json::from_value(json!({"type": "public"})).unwrap();
        assert_eq!(v, Visibility::Public);
    }

    #[test]
    fn user_token_is_not_serialized() {
        let u = User {
            id: "u1".into(),
            name: "A".into(),
            role: Role::Teacher,
            token: "secret".into(),
            cefr: None,
            placement_theta: None,
        };
        let v = serde_json::to_value(&u).unwrap();
        assert_eq!(v["role"], "teacher");
        assert!(v.get("token").is_none());
    }

    #[test]
    fn events_are_tagged() {
        let e = Event::CefrSet {
            user: "u1".into(),
            level: CefrLevel::B2,
        };
        assert_eq!(
            serde_json::to_value(&e).unwrap(),
            json!({"event": "cefr_set", "user": "u1", "level": "B2"})
        );
    }
}
