//! The tutoring service: users, stories, practice sessions, placement,
//! progress and teacher groups.
//!
//! Every change is an [`Event`]. A mutation validates, applies the event to
//! the in-memory state and appends it to the journal; startup replays the
//! journal through the same `apply`, so a restarted service is identical to
//! the one that wrote the log.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use kielo::constructs::{CefrLevel, ConstructKind};
use kielo::exercises::{Exercise, ExerciseCandidate, ExercisePayload};
use kielo::feedback::{AttemptHistory, FeedbackError, Hint, MAX_ATTEMPTS};
use kielo::gold::load_gold;
use kielo::learner::{
    cefr_value, estimate, logistic, placement_next, progress_report, sample_index, AttemptEvent,
    AttemptKind, ConstructProgress, EventLog, PlacementItem, PlacementStep, SamplerConfig,
    SkillState,
};
use kielo::pipeline::ChunkKind;
use kielo::{
    build_cloze, build_hint_sequence, build_mc, constructs_for_token, diagnose_answer,
    generate_candidates, load_pack, next_hint, process_story, AnnotatedStory, LanguagePack,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::journal::Journal;
use crate::model::{Event, Group, Role, User, Visibility};

type Result<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TutorConfig {
    /// Share of sampled exercises offered as multiple choice.
    pub multiple_choice_share: f64,
    pub default_density: usize,
}

impl Default for TutorConfig {
    fn default() -> Self {
        TutorConfig {
            multiple_choice_share: 0.5,
            default_density: 3,
        }
    }
}

#[derive(Debug, Clone)]
struct StoredStory {
    id: String,
    owner: String,
    title: String,
    language: String,
    visibility: Visibility,
    annotated: AnnotatedStory,
    /// Paragraph index of every sentence.
    paragraphs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExerciseStatus {
    Open,
    Correct,
    Exhausted,
}

#[derive(Debug, Clone)]
struct SessionExercise {
    exercise: Exercise,
    history: AttemptHistory,
    wrong: u32,
    requests: u32,
    ordinal: u32,
    status: ExerciseStatus,
    given: Vec<String>,
}

impl SessionExercise {
    fn hearts(&self) -> u32 {
        (MAX_ATTEMPTS as u32).saturating_sub(self.wrong + self.requests)
    }

    fn hints_shown(&self) -> u32 {
        self.history.consumed.len() as u32
    }
}

#[derive(Debug, Clone)]
struct Session {
    id: String,
    learner: String,
    story: String,
    seed: u64,
    density: usize,
    exercises: Vec<SessionExercise>,
}

impl Session {
    fn active(&self) -> bool {
        self.exercises
            .iter()
            .any(|e| e.status == ExerciseStatus::Open)
    }
}

#[derive(Debug, Clone)]
struct Placement {
    id: String,
    learner: String,
    language: String,
    bank: Vec<PlacementItem>,
    responses: Vec<(String, bool)>,
}

// ---- views -------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registered {
    pub id: String,
    pub token: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorySummary {
    pub id: String,
    pub title: String,
    pub language: String,
    pub owner: String,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenView {
    pub index: usize,
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub sentence: usize,
    pub lemma: Option<String>,
    pub pos: Option<String>,
    pub features: Option<String>,
    pub ambiguous: bool,
    /// May appear in an exercise.
    pub candidate: bool,
    pub constructs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkView {
    pub kind: ChunkKind,
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructEntry {
    pub id: String,
    pub name: String,
    pub kind: ConstructKind,
    pub cefr: Option<CefrLevel>,
    /// Matched token indices of every instance.
    pub instances: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewView {
    pub id: String,
    pub title: String,
    pub language: String,
    pub text: String,
    pub tokens: Vec<TokenView>,
    pub chunks: Vec<ChunkView>,
    pub constructs: Vec<ConstructEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlossView {
    pub index: usize,
    pub surface: String,
    pub lemma: Option<String>,
    pub gloss: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExerciseView {
    pub index: usize,
    #[serde(flatten)]
    pub payload: ExercisePayload,
    pub status: ExerciseStatus,
    pub hearts: u32,
    pub hints: Vec<Hint>,
    pub given: Vec<String>,
    /// Present once the exercise is answered correctly or exhausted.
    pub answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub learner: String,
    pub story: String,
    pub seed: u64,
    pub density: usize,
    pub exercises: Vec<SessionExerciseView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffSummary {
    pub lemma_match: bool,
    pub out_of_vocabulary: bool,
    /// Categories in which the answer differs, most general first.
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptResult {
    pub exercise: usize,
    pub correct: bool,
    pub status: ExerciseStatus,
    pub hearts: u32,
    pub hint: Option<Hint>,
    pub diff: Option<DiffSummary>,
    pub answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementView {
    pub id: String,
    pub language: String,
    pub finished: bool,
    pub item: Option<ExercisePayload>,
    pub answered: usize,
    pub theta: f64,
    pub se: f64,
    pub last_correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressView {
    pub learner: String,
    pub theta: f64,
    pub constructs: Vec<ConstructProgress>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupProgressView {
    pub group: String,
    pub members: BTreeMap<String, ProgressView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserView {
    pub id: String,
    pub name: String,
    pub role: Role,
    pub cefr: Option<CefrLevel>,
    pub placement_theta: Option<f64>,
}

enum Applied {
    Nothing,
    Attempt(AttemptResult),
}

// ---- service -----------------------------------------------------------

pub struct Tutor {
    config: TutorConfig,
    packs: BTreeMap<String, LanguagePack>,
    /// Placement exercises per language, from each pack's gold corpus.
    placement_items: BTreeMap<String, BTreeMap<String, Exercise>>,
    journal: Journal,
    users: BTreeMap<String, User>,
    tokens: BTreeMap<String, String>,
    stories: BTreeMap<String, StoredStory>,
    sessions: BTreeMap<String, Session>,
    groups: BTreeMap<String, Group>,
    placements: BTreeMap<String, Placement>,
    log: EventLog,
    events: usize,
    skill_cache: Option<(usize, Option<SkillState>)>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Paragraph of each sentence; paragraphs are separated by blank lines.
fn sentence_paragraphs(story: &AnnotatedStory) -> Vec<usize> {
    let mut breaks = Vec::new();
    let mut pos = 0;
    let mut blank_seen = false;
    for line in story.text.split('\n') {
        let n = line.chars().count();
        if line.trim().is_empty() {
            blank_seen = true;
        } else if blank_seen {
            breaks.push(pos);
            blank_seen = false;
        }
        pos += n + 1;
    }
    story
        .sentences
        .iter()
        .map(|s| breaks.iter().filter(|&&b| b <= s.char_start).count())
        .collect()
}

/// Construct ids in the learner model carry their language.
fn model_id(language: &str, construct: &str) -> String {
    format!("{language}:{construct}")
}

impl Tutor {
    /// Loads every pack directory under `packs_dir` and replays `journal`
    /// when given.
    pub fn open(packs_dir: &Path, journal: Option<&Path>, config: TutorConfig) -> Result<Self> {
        let mut packs = Vec::new();
        let entries = std::fs::read_dir(packs_dir)
            .map_err(|e| ServiceError::Internal(format!("{}: {e}", packs_dir.display())))?;
        let mut dirs: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        dirs.sort();
        for dir in dirs {
            packs.push(
                load_pack(&dir)
                    .map_err(|e| ServiceError::Internal(format!("{}: {e}", dir.display())))?,
            );
        }
        Self::with_packs(packs, journal, config)
    }

    pub fn with_packs(
        packs: Vec<LanguagePack>,
        journal: Option<&Path>,
        config: TutorConfig,
    ) -> Result<Self> {
        let mut placement_items = BTreeMap::new();
        for pack in &packs {
            let mut items = BTreeMap::new();
            if let Ok((corpus, _)) = load_gold(pack) {
                let story = process_story(&format!("placement-{}", pack.language), &corpus, pack)
                    .map_err(|e| ServiceError::Internal(e.to_string()))?;
                for c in generate_candidates(&story, &story.constructs, pack) {
                    let mut ex = build_cloze(&c);
                    ex.hints = build_hint_sequence(&ex, &story, &story.constructs, pack);
                    items.insert(ex.id.clone(), ex);
                }
            }
            placement_items.insert(pack.language.clone(), items);
        }
        let (journal, events) = match journal {
            Some(p) => Journal::open(p)?,
            None => (Journal::memory(), Vec::new()),
        };
        let mut tutor = Tutor {
            config,
            packs: packs.into_iter().map(|p| (p.language.clone(), p)).collect(),
            placement_items,
            journal,
            users: BTreeMap::new(),
            tokens: BTreeMap::new(),
            stories: BTreeMap::new(),
            sessions: BTreeMap::new(),
            groups: BTreeMap::new(),
            placements: BTreeMap::new(),
            log: EventLog::new(),
            events: 0,
            skill_cache: None,
        };
        for ev in &events {
            tutor.apply(ev)?;
        }
        Ok(tutor)
    }

    pub fn languages(&self) -> Vec<(String, String)> {
        self.packs
            .values()
            .map(|p| (p.language.clone(), p.name.clone()))
            .collect()
    }

    /// The attempt log in NDJSON form.
    pub fn attempt_log(&self) -> String {
        self.log.to_ndjson()
    }

    fn commit(&mut self, event: Event) -> Result<Applied> {
        let applied = self.apply(&event)?;
        self.journal.append(&event)?;
        Ok(applied)
    }

    fn next_id(&self, prefix: &str) -> String {
        format!("{prefix}{}", self.events + 1)
    }

    // ---- users ---------------------------------------------------------

    pub fn authenticate(&self, token: &str) -> Result<String> {
        self.tokens
            .get(token)
            .cloned()
            .ok_or(ServiceError::Unauthorized)
    }

    pub fn register(&mut self, name: &str, role: Role) -> Result<Registered> {
        if name.trim().is_empty() {
            return Err(ServiceError::BadRequest("name is empty".into()));
        }
        let id = self.next_id("u");
        let token = format!("{:032x}", rand::rng().random::<u128>());
        self.commit(Event::UserRegistered {
            id: id.clone(),
            name: name.into(),
            role,
            token: token.clone(),
        })?;
        Ok(Registered { id, token, role })
    }

    pub fn user(&self, id: &str) -> Result<UserView> {
        let u = self
            .users
            .get(id)
            .ok_or_else(|| ServiceError::NotFound(format!("user `{id}`")))?;
        Ok(UserView {
            id: u.id.clone(),
            name: u.name.clone(),
            role: u.role,
            cefr: u.cefr,
            placement_theta: u.placement_theta,
        })
    }

    /// Manual CEFR self-assessment; sets the starting ability.
    pub fn set_cefr(&mut self, user: &str, level: CefrLevel) -> Result<UserView> {
        self.commit(Event::CefrSet {
            user: user.into(),
            level,
        })?;
        self.user(user)
    }

    // ---- stories -------------------------------------------------------

    pub fn upload_story(
        &mut self,
        owner: &str,
        language: &str,
        title: &str,
        text: &str,
    ) -> Result<String> {
        let id = self.next_id("st");
        self.commit(Event::StoryUploaded {
            id: id.clone(),
            owner: owner.into(),
            language: language.into(),
            title: title.into(),
            text: text.into(),
        })?;
        Ok(id)
    }

    fn is_group_reader(&self, user: &str, group: &str) -> bool {
        self.groups
            .get(group)
            .is_some_and(|g| g.teacher == user || g.members.contains(user))
    }

    fn readable_story(&self, user: &str, id: &str) -> Result<&StoredStory> {
        let s = self
            .stories
            .get(id)
            .ok_or_else(|| ServiceError::NotFound(format!("story `{id}`")))?;
        let ok = s.owner == user
            || match &s.visibility {
                Visibility::Private => false,
                Visibility::Public => true,
                Visibility::Group(g) => self.is_group_reader(user, g),
            };
        if ok {
            Ok(s)
        } else {
            Err(ServiceError::Forbidden)
        }
    }

    pub fn list_stories(&self, user: &str) -> Vec<StorySummary> {
        self.stories
            .keys()
            .filter_map(|id| self.readable_story(user, id).ok())
            .map(|s| StorySummary {
                id: s.id.clone(),
                title: s.title.clone(),
                language: s.language.clone(),
                owner: s.owner.clone(),
                visibility: s.visibility.clone(),
            })
            .collect()
    }

    /// Only the owner changes visibility. Sharing with a group also needs the
    /// owner to teach or belong to it.
    pub fn set_visibility(
        &mut self,
        user: &str,
        story: &str,
        visibility: Visibility,
    ) -> Result<StorySummary> {
        let s = self
            .stories
            .get(story)
            .ok_or_else(|| ServiceError::NotFound(format!("story `{story}`")))?;
        if s.owner != user {
            return Err(ServiceError::Forbidden);
        }
        if let Visibility::Group(g) = &visibility {
            if !self.groups.contains_key(g) {
                return Err(ServiceError::NotFound(format!("group `{g}`")));
            }
            if !self.is_group_reader(user, g) {
                return Err(ServiceError::Forbidden);
            }
        }
        self.commit(Event::VisibilitySet {
            story: story.into(),
            visibility,
        })?;
        Ok(self
            .list_stories(user)
            .into_iter()
            .find(|s| s.id == story)
            .expect("owner reads own story"))
    }

    pub fn preview(&self, user: &str, story: &str) -> Result<PreviewView> {
        let s = self.readable_story(user, story)?;
        let pack = &self.packs[&s.language];
        let ann = &s.annotated;
        let candidates = generate_candidates(ann, &ann.constructs, pack);
        let is_candidate = |i: usize| candidates.iter().any(|c| c.start <= i && i <= c.end);
        let tokens = ann
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Ok(TokenView {
                    index: i,
                    surface: t.surface.clone(),
                    start: t.start,
                    end: t.end,
                    sentence: t.sentence,
                    lemma: t.chosen.as_ref().map(|a| a.lemma.clone()),
                    pos: t.chosen.as_ref().map(|a| a.pos.clone()),
                    features: t.chosen.as_ref().map(|a| a.features.to_string()),
                    ambiguous: t.ambiguous,
                    candidate: is_candidate(i),
                    constructs: constructs_for_token(ann, i, pack)
                        .map_err(|e| ServiceError::Internal(e.to_string()))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let chunks = ann
            .chunks
            .iter()
            .map(|c| ChunkView {
                kind: c.kind,
                start: c.start,
                end: c.end,
                head: c.head,
            })
            .collect();
        let constructs = pack
            .constructs
            .iter()
            .filter_map(|d| {
                let instances: Vec<Vec<usize>> = ann
                    .constructs
                    .iter()
                    .filter(|i| i.construct == d.id)
                    .map(|i| i.matched.clone())
                    .collect();
                (!instances.is_empty()).then(|| ConstructEntry {
                    id: d.id.clone(),
                    name: d.name.clone(),
                    kind: d.kind,
                    cefr: d.cefr,
                    instances,
                })
            })
            .collect();
        Ok(PreviewView {
            id: s.id.clone(),
            title: s.title.clone(),
            language: s.language.clone(),
            text: ann.text.clone(),
            tokens,
            chunks,
            constructs,
        })
    }

    /// Dictionary stub: the pack gloss of the token's lemma, if any.
    pub fn gloss(&self, user: &str, story: &str, index: usize) -> Result<GlossView> {
        let s = self.readable_story(user, story)?;
        let t = s
            .annotated
            .tokens
            .get(index)
            .ok_or_else(|| ServiceError::NotFound(format!("token {index}")))?;
        let pack = &self.packs[&s.language];
        let lemma = t.chosen_lemma().map(String::from);
        let gloss = t.chosen.as_ref().and_then(|a| {
            pack.morphology
                .lexemes_by_lemma(&a.lemma)
                .find(|l| l.pos == a.pos)
                .and_then(|l| l.gloss.clone())
        });
        Ok(GlossView {
            index,
            surface: t.surface.clone(),
            lemma,
            gloss,
        })
    }

    // ---- learner model -------------------------------------------------

    fn skill_state(&mut self) -> Option<SkillState> {
        let n = self.log.observations().len();
        if let Some((m, s)) = &self.skill_cache {
            if *m == n {
                return s.clone();
            }
        }
        let s = estimate(self.log.observations()).ok();
        self.skill_cache = Some((n, s.clone()));
        s
    }

    fn cefr_difficulty(packs: &BTreeMap<String, LanguagePack>, construct: &str) -> Option<f64> {
        let (lang, id) = construct.split_once(':')?;
        packs.get(lang)?.construct(id)?.cefr.map(cefr_value)
    }

    fn difficulty(
        &self,
        state: Option<&SkillState>,
        language: &str,
        links: &[String],
    ) -> Option<f64> {
        links
            .iter()
            .map(|c| model_id(language, c))
            .filter_map(|c| {
                state
                    .and_then(|s| s.difficulties.get(&c).copied())
                    .or_else(|| Self::cefr_difficulty(&self.packs, &c))
            })
            .reduce(f64::max)
    }

    /// Estimated ability, else the placement result, else the self-set
    /// CEFR level, else the prior mean.
    fn theta(&self, state: Option<&SkillState>, learner: &str) -> f64 {
        let user = self.users.get(learner);
        state
            .and_then(|s| s.abilities.get(learner).copied())
            .or_else(|| user.and_then(|u| u.placement_theta))
            .or_else(|| user.and_then(|u| u.cefr).map(cefr_value))
            .unwrap_or(0.0)
    }

    // ---- sessions ------------------------------------------------------

    /// Starts a practice session, or resumes the learner's active one on
    /// this story. Up to `density` exercises are drawn per paragraph
    /// without replacement, weighted toward a 50% predicted success.
    pub fn start_session(
        &mut self,
        learner: &str,
        story: &str,
        density: Option<usize>,
        seed: Option<u64>,
    ) -> Result<SessionView> {
        self.readable_story(learner, story)?;
        if let Some(s) = self
            .sessions
            .values()
            .find(|s| s.learner == learner && s.story == story && s.active())
        {
            let id = s.id.clone();
            return self.session(learner, &id);
        }
        let density = density.unwrap_or(self.config.default_density).max(1);
        let seed = seed.unwrap_or(self.events as u64);
        let exercises = self.sample_exercises(learner, story, density, seed)?;
        let id = self.next_id("s");
        self.commit(Event::SessionStarted {
            id: id.clone(),
            learner: learner.into(),
            story: story.into(),
            seed,
            density,
            exercises,
        })?;
        self.session(learner, &id)
    }

    fn sample_exercises(
        &mut self,
        learner: &str,
        story: &str,
        density: usize,
        seed: u64,
    ) -> Result<Vec<Exercise>> {
        let state = self.skill_state();
        let s = &self.stories[story];
        let pack = &self.packs[&s.language];
        let ann = &s.annotated;
        let theta = self.theta(state.as_ref(), learner);
        let mut pools: BTreeMap<usize, Vec<(ExerciseCandidate, f64)>> = BTreeMap::new();
        for c in generate_candidates(ann, &ann.constructs, pack) {
            if let Some(b) = self.difficulty(state.as_ref(), &s.language, &c.links) {
                pools
                    .entry(s.paragraphs[c.sentence])
                    .or_default()
                    .push((c, logistic(theta - b)));
            }
        }
        let config = SamplerConfig {
            seed,
            ..SamplerConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen = Vec::new();
        for pool in pools.values_mut() {
            for _ in 0..density {
                if pool.is_empty() {
                    break;
                }
                let ps: Vec<f64> = pool.iter().map(|(_, p)| *p).collect();
                let i = sample_index(&ps, &config, &mut rng)
                    .map_err(|e| ServiceError::Internal(e.to_string()))?;
                chosen.push(pool.remove(i).0);
            }
        }
        if chosen.is_empty() {
            return Err(ServiceError::NoCandidates);
        }
        chosen.sort_by_key(|c| c.start);
        let mut out = Vec::new();
        for c in chosen {
            let mut ex = None;
            if rng.random_bool(self.config.multiple_choice_share) {
                // first linked construct whose recipe yields options; else cloze
                ex = c
                    .links
                    .iter()
                    .find_map(|l| build_mc(&c, l, ann, pack, &mut rng).ok());
            }
            let mut ex = ex.unwrap_or_else(|| build_cloze(&c));
            ex.hints = build_hint_sequence(&ex, ann, &ann.constructs, pack);
            out.push(ex);
        }
        Ok(out)
    }

    fn own_session(&self, learner: &str, id: &str) -> Result<&Session> {
        let s = self
            .sessions
            .get(id)
            .ok_or_else(|| ServiceError::NotFound(format!("session `{id}`")))?;
        if s.learner != learner {
            return Err(ServiceError::Forbidden);
        }
        Ok(s)
    }

    pub fn session(&self, learner: &str, id: &str) -> Result<SessionView> {
        let s = self.own_session(learner, id)?;
        let exercises = s
            .exercises
            .iter()
            .enumerate()
            .map(|(i, e)| SessionExerciseView {
                index: i,
                payload: e.exercise.payload(),
                status: e.status,
                hearts: e.hearts(),
                hints: e
                    .history
                    .consumed
                    .iter()
                    .map(|&l| e.exercise.hints[l].clone())
                    .collect(),
                given: e.given.clone(),
                answer: (e.status != ExerciseStatus::Open)
                    .then(|| e.exercise.candidate.answer.clone()),
            })
            .collect();
        Ok(SessionView {
            id: s.id.clone(),
            learner: s.learner.clone(),
            story: s.story.clone(),
            seed: s.seed,
            density: s.density,
            exercises,
        })
    }

    fn check_open(&self, learner: &str, session: &str, exercise: usize) -> Result<()> {
        let s = self.own_session(learner, session)?;
        let e = s
            .exercises
            .get(exercise)
            .ok_or_else(|| ServiceError::UnknownExercise(exercise.to_string()))?;
        match e.status {
            ExerciseStatus::Open => Ok(()),
            ExerciseStatus::Correct => Err(ServiceError::ExerciseClosed),
            ExerciseStatus::Exhausted => Err(ServiceError::ExhaustedAttempts),
        }
    }

    pub fn submit_answer(
        &mut self,
        learner: &str,
        session: &str,
        exercise: usize,
        given: &str,
    ) -> Result<AttemptResult> {
        self.check_open(learner, session, exercise)?;
        let ev = Event::Answered {
            session: session.into(),
            exercise,
            given: given.into(),
            timestamp: now(),
        };
        match self.commit(ev)? {
            Applied::Attempt(r) => Ok(r),
            Applied::Nothing => Err(ServiceError::Internal("answer produced no result".into())),
        }
    }

    pub fn request_hint(
        &mut self,
        learner: &str,
        session: &str,
        exercise: usize,
    ) -> Result<AttemptResult> {
        self.check_open(learner, session, exercise)?;
        let ev = Event::HintRequested {
            session: session.into(),
            exercise,
            timestamp: now(),
        };
        match self.commit(ev)? {
            Applied::Attempt(r) => Ok(r),
            Applied::Nothing => Err(ServiceError::Internal("hint produced no result".into())),
        }
    }

    // ---- placement -----------------------------------------------------

    pub fn start_placement(&mut self, learner: &str, language: &str) -> Result<PlacementView> {
        if !self.packs.contains_key(language) {
            return Err(ServiceError::UnsupportedLanguage(language.into()));
        }
        let state = self.skill_state();
        let bank: Vec<PlacementItem> = self.placement_items[language]
            .values()
            .filter_map(|ex| {
                self.difficulty(state.as_ref(), language, &ex.candidate.links)
                    .map(|b| PlacementItem {
                        id: ex.id.clone(),
                        difficulty: b,
                    })
            })
            .collect();
        if bank.is_empty() {
            return Err(ServiceError::BadRequest(format!(
                "no placement items for `{language}`"
            )));
        }
        let id = self.next_id("p");
        self.commit(Event::PlacementStarted {
            id: id.clone(),
            learner: learner.into(),
            language: language.into(),
            bank,
        })?;
        self.placement(learner, &id)
    }

    fn own_placement(&self, learner: &str, id: &str) -> Result<&Placement> {
        let p = self
            .placements
            .get(id)
            .ok_or_else(|| ServiceError::NotFound(format!("placement `{id}`")))?;
        if p.learner != learner {
            return Err(ServiceError::Forbidden);
        }
        Ok(p)
    }

    pub fn placement(&self, learner: &str, id: &str) -> Result<PlacementView> {
        let p = self.own_placement(learner, id)?;
        let step = placement_next(&p.bank, &p.responses)
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        let (item, theta, se, finished) = match step {
            PlacementStep::Next { item, theta, se } => (
                Some(self.placement_items[&p.language][&item.id].payload()),
                theta,
                se,
                false,
            ),
            PlacementStep::Finished { theta, se } => (None, theta, se, true),
        };
        Ok(PlacementView {
            id: p.id.clone(),
            language: p.language.clone(),
            finished,
            item,
            answered: p.responses.len(),
            theta,
            se,
            last_correct: p.responses.last().map(|r| r.1),
        })
    }

    pub fn answer_placement(
        &mut self,
        learner: &str,
        id: &str,
        given: &str,
    ) -> Result<PlacementView> {
        if self.placement(learner, id)?.finished {
            return Err(ServiceError::PlacementFinished);
        }
        self.commit(Event::PlacementAnswered {
            placement: id.into(),
            given: given.into(),
        })?;
        self.placement(learner, id)
    }

    // ---- progress and groups -------------------------------------------

    fn learner_exists(&self, learner: &str) -> Result<()> {
        match self.users.get(learner) {
            Some(u) if u.role == Role::Learner => Ok(()),
            _ => Err(ServiceError::UnknownLearner(learner.into())),
        }
    }

    fn progress_view(&mut self, learner: &str) -> ProgressView {
        let state = self.skill_state();
        let packs = &self.packs;
        let constructs = progress_report(learner, state.as_ref(), self.log.observations(), |c| {
            Self::cefr_difficulty(packs, c)
        });
        ProgressView {
            learner: learner.into(),
            theta: self.theta(state.as_ref(), learner),
            constructs,
        }
    }

    /// Learners read their own progress; teachers read it only for learners
    /// who accepted an invitation to one of their groups.
    pub fn progress(&mut self, requester: &str, learner: &str) -> Result<ProgressView> {
        self.learner_exists(learner)?;
        let allowed = requester == learner
            || self
                .groups
                .values()
                .any(|g| g.teacher == requester && g.members.contains(learner));
        if !allowed {
            return Err(ServiceError::Forbidden);
        }
        Ok(self.progress_view(learner))
    }

    pub fn create_group(&mut self, teacher: &str, name: &str) -> Result<Group> {
        if self.users.get(teacher).map(|u| u.role) != Some(Role::Teacher) {
            return Err(ServiceError::Forbidden);
        }
        let id = self.next_id("g");
        self.commit(Event::GroupCreated {
            id: id.clone(),
            teacher: teacher.into(),
            name: name.into(),
        })?;
        Ok(self.groups[&id].clone())
    }

    fn taught_group(&self, teacher: &str, group: &str) -> Result<&Group> {
        let g = self
            .groups
            .get(group)
            .ok_or_else(|| ServiceError::NotFound(format!("group `{group}`")))?;
        if g.teacher != teacher {
            return Err(ServiceError::Forbidden);
        }
        Ok(g)
    }

    pub fn group(&self, requester: &str, group: &str) -> Result<Group> {
        let g = self
            .groups
            .get(group)
            .ok_or_else(|| ServiceError::NotFound(format!("group `{group}`")))?;
        if g.teacher != requester
            && !g.members.contains(requester)
            && !g.invited.contains(requester)
        {
            return Err(ServiceError::Forbidden);
        }
        Ok(g.clone())
    }

    pub fn invite(&mut self, teacher: &str, group: &str, learner: &str) -> Result<Group> {
        self.taught_group(teacher, group)?;
        self.learner_exists(learner)?;
        self.commit(Event::Invited {
            group: group.into(),
            learner: learner.into(),
        })?;
        Ok(self.groups[group].clone())
    }

    pub fn accept(&mut self, learner: &str, group: &str) -> Result<Group> {
        let g = self
            .groups
            .get(group)
            .ok_or_else(|| ServiceError::NotFound(format!("group `{group}`")))?;
        if !g.invited.contains(learner) && !g.members.contains(learner) {
            return Err(ServiceError::Forbidden);
        }
        self.commit(Event::InvitationAccepted {
            group: group.into(),
            learner: learner.into(),
        })?;
        Ok(self.groups[group].clone())
    }

    pub fn share_story(&mut self, user: &str, group: &str, story: &str) -> Result<StorySummary> {
        self.set_visibility(user, story, Visibility::Group(group.into()))
    }

    pub fn group_progress(&mut self, teacher: &str, group: &str) -> Result<GroupProgressView> {
        let members: Vec<String> = self
            .taught_group(teacher, group)?
            .members
            .iter()
            .cloned()
            .collect();
        let members = members
            .into_iter()
            .map(|m| (m.clone(), self.progress_view(&m)))
            .collect();
        Ok(GroupProgressView {
            group: group.into(),
            members,
        })
    }

    pub fn member_progress(
        &mut self,
        teacher: &str,
        group: &str,
        learner: &str,
    ) -> Result<ProgressView> {
        if !self.taught_group(teacher, group)?.members.contains(learner) {
            return Err(ServiceError::Forbidden);
        }
        Ok(self.progress_view(learner))
    }

    // ---- event application ---------------------------------------------

    fn apply(&mut self, event: &Event) -> Result<Applied> {
        let applied = match event {
            Event::UserRegistered {
                id,
                name,
                role,
                token,
            } => {
                self.users.insert(
                    id.clone(),
                    User {
                        id: id.clone(),
                        name: name.clone(),
                        role: *role,
                        token: token.clone(),
                        cefr: None,
                        placement_theta: None,
                    },
                );
                self.tokens.insert(token.clone(), id.clone());
                Applied::Nothing
            }
            Event::CefrSet { user, level } => {
                let u = self
                    .users
                    .get_mut(user)
                    .ok_or_else(|| ServiceError::NotFound(format!("user `{user}`")))?;
                u.cefr = Some(*level);
                Applied::Nothing
            }
            Event::StoryUploaded {
                id,
                owner,
                language,
                title,
                text,
            } => {
                let pack = self
                    .packs
                    .get(language)
                    .ok_or_else(|| ServiceError::UnsupportedLanguage(language.clone()))?;
                if text.trim().is_empty() {
                    return Err(ServiceError::EmptyText);
                }
                let annotated = process_story(id, text, pack)
                    .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
                let paragraphs = sentence_paragraphs(&annotated);
                self.stories.insert(
                    id.clone(),
                    StoredStory {
                        id: id.clone(),
                        owner: owner.clone(),
                        title: title.clone(),
                        language: language.clone(),
                        visibility: Visibility::Private,
                        annotated,
                        paragraphs,
                    },
                );
                Applied::Nothing
            }
            Event::VisibilitySet { story, visibility } => {
                let s = self
                    .stories
                    .get_mut(story)
                    .ok_or_else(|| ServiceError::NotFound(format!("story `{story}`")))?;
                if let Visibility::Group(g) = &s.visibility {
                    if let Some(g) = self.groups.get_mut(g) {
                        g.stories.remove(story);
                    }
                }
                if let Visibility::Group(g) = visibility {
                    self.groups
                        .get_mut(g)
                        .ok_or_else(|| ServiceError::NotFound(format!("group `{g}`")))?
                        .stories
                        .insert(story.clone());
                }
                s.visibility = visibility.clone();
                Applied::Nothing
            }
            Event::SessionStarted {
                id,
                learner,
                story,
                seed,
                density,
                exercises,
            } => {
                for ex in exercises {
                    let constructs: Vec<String> = ex
                        .candidate
                        .links
                        .iter()
                        .map(|c| model_id(&self.stories[story].language, c))
                        .collect();
                    self.log
                        .register_exercise(&format!("{id}/{}", ex.id), &constructs);
                }
                let exercises = exercises
                    .iter()
                    .map(|ex| SessionExercise {
                        exercise: ex.clone(),
                        history: AttemptHistory::default(),
                        wrong: 0,
                        requests: 0,
                        ordinal: 0,
                        status: ExerciseStatus::Open,
                        given: Vec::new(),
                    })
                    .collect();
                self.sessions.insert(
                    id.clone(),
                    Session {
                        id: id.clone(),
                        learner: learner.clone(),
                        story: story.clone(),
                        seed: *seed,
                        density: *density,
                        exercises,
                    },
                );
                Applied::Nothing
            }
            Event::Answered {
                session,
                exercise,
                given,
                timestamp,
            } => {
                Applied::Attempt(self.apply_attempt(session, *exercise, Some(given), *timestamp)?)
            }
            Event::HintRequested {
                session,
                exercise,
                timestamp,
            } => Applied::Attempt(self.apply_attempt(session, *exercise, None, *timestamp)?),
            Event::GroupCreated { id, teacher, name } => {
                self.groups.insert(
                    id.clone(),
                    Group {
                        id: id.clone(),
                        name: name.clone(),
                        teacher: teacher.clone(),
                        invited: BTreeSet::new(),
                        members: BTreeSet::new(),
                        stories: BTreeSet::new(),
                    },
                );
                Applied::Nothing
            }
            Event::Invited { group, learner } => {
                let g = self
                    .groups
                    .get_mut(group)
                    .ok_or_else(|| ServiceError::NotFound(format!("group `{group}`")))?;
                if !g.members.contains(learner) {
                    g.invited.insert(learner.clone());
                }
                Applied::Nothing
            }
            Event::InvitationAccepted { group, learner } => {
                let g = self
                    .groups
                    .get_mut(group)
                    .ok_or_else(|| ServiceError::NotFound(format!("group `{group}`")))?;
                g.invited.remove(learner);
                g.members.insert(learner.clone());
                Applied::Nothing
            }
            Event::PlacementStarted {
                id,
                learner,
                language,
                bank,
            } => {
                self.placements.insert(
                    id.clone(),
                    Placement {
                        id: id.clone(),
                        learner: learner.clone(),
                        language: language.clone(),
                        bank: bank.clone(),
                        responses: Vec::new(),
                    },
                );
                Applied::Nothing
            }
            Event::PlacementAnswered { placement, given } => {
                let p = self
                    .placements
                    .get_mut(placement)
                    .ok_or_else(|| ServiceError::NotFound(format!("placement `{placement}`")))?;
                let step = placement_next(&p.bank, &p.responses)
                    .map_err(|e| ServiceError::Internal(e.to_string()))?;
                let PlacementStep::Next { item, .. } = step else {
                    return Err(ServiceError::PlacementFinished);
                };
                let correct = self.placement_items[&p.language][&item.id].check(given);
                p.responses.push((item.id, correct));
                if let PlacementStep::Finished { theta, .. } = placement_next(&p.bank, &p.responses)
                    .map_err(|e| ServiceError::Internal(e.to_string()))?
                {
                    if let Some(u) = self.users.get_mut(&p.learner) {
                        u.placement_theta = Some(theta);
                    }
                }
                Applied::Nothing
            }
        };
        self.events += 1;
        Ok(applied)
    }

    /// An answer (`given`) or a hint request on one session exercise.
    ///
    /// A wrong answer costs a heart and shows the next hint; a hint request
    /// costs a heart too. When the last heart goes the answer is revealed
    /// and the exercise closes as failed.
    fn apply_attempt(
        &mut self,
        session: &str,
        index: usize,
        given: Option<&String>,
        timestamp: u64,
    ) -> Result<AttemptResult> {
        let s = self
            .sessions
            .get_mut(session)
            .ok_or_else(|| ServiceError::NotFound(format!("session `{session}`")))?;
        let story = &self.stories[&s.story];
        let pack = &self.packs[&story.language];
        let learner = s.learner.clone();
        let log_id = format!(
            "{session}/{}",
            s.exercises
                .get(index)
                .map_or("", |e| e.exercise.id.as_str())
        );
        let e = s
            .exercises
            .get_mut(index)
            .ok_or_else(|| ServiceError::UnknownExercise(index.to_string()))?;
        match e.status {
            ExerciseStatus::Open => {}
            ExerciseStatus::Correct => return Err(ServiceError::ExerciseClosed),
            ExerciseStatus::Exhausted => return Err(ServiceError::ExhaustedAttempts),
        }
        let constructs: Vec<String> = e
            .exercise
            .candidate
            .links
            .iter()
            .map(|c| model_id(&story.language, c))
            .collect();
        let mut result = AttemptResult {
            exercise: index,
            correct: false,
            status: ExerciseStatus::Open,
            hearts: 0,
            hint: None,
            diff: None,
            answer: None,
        };
        let mut events = Vec::new();
        let mut attempt =
            |kind, given: Option<String>, correct: Option<bool>, e: &mut SessionExercise| {
                e.ordinal += 1;
                events.push(AttemptEvent {
                    learner: learner.clone(),
                    exercise: log_id.clone(),
                    constructs: constructs.clone(),
                    ordinal: e.ordinal,
                    kind,
                    given,
                    correct,
                    hints: e.hints_shown(),
                    timestamp,
                });
            };
        match given {
            Some(given) if e.exercise.check(given) => {
                e.given.push(given.clone());
                e.status = ExerciseStatus::Correct;
                result.correct = true;
                attempt(AttemptKind::Answer, Some(given.clone()), Some(true), e);
            }
            Some(given) => {
                e.given.push(given.clone());
                e.wrong += 1;
                let d = diagnose_answer(given, &e.exercise, pack);
                result.diff = Some(DiffSummary {
                    lemma_match: d.lemma_match,
                    out_of_vocabulary: d.out_of_vocabulary,
                    categories: d.mismatches.iter().map(|m| m.category.clone()).collect(),
                });
                e.history.last_wrong = Some(d);
                if e.hearts() == 0 {
                    e.status = ExerciseStatus::Exhausted;
                } else if let Ok(h) = next_hint(&e.exercise, &e.history) {
                    e.history.consume(&h);
                    result.hint = Some(h);
                }
                attempt(AttemptKind::Answer, Some(given.clone()), Some(false), e);
            }
            None => {
                let h = match next_hint(&e.exercise, &e.history) {
                    Ok(h) => h,
                    Err(FeedbackError::Exhausted) => return Err(ServiceError::NoMoreHints),
                    Err(err) => return Err(ServiceError::Internal(err.to_string())),
                };
                e.history.consume(&h);
                e.requests += 1;
                result.hint = Some(h);
                attempt(AttemptKind::HintRequest, None, None, e);
                if e.hearts() == 0 {
                    // the last heart went on a hint: the exercise closes as failed
                    e.status = ExerciseStatus::Exhausted;
                    attempt(AttemptKind::Answer, None, Some(false), e);
                }
            }
        }
        result.status = e.status;
        result.hearts = e.hearts();
        if e.status != ExerciseStatus::Open {
            result.answer = Some(e.exercise.candidate.answer.clone());
        }
        for ev in events {
            self.log
                .record_attempt(ev)
                .map_err(|err| ServiceError::Internal(err.to_string()))?;
        }
        Ok(result)
    }
}
