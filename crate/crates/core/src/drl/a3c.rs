//! Advantage actor-critic training with N workers sharing one parameter
//! store.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::local::{policy_plan, DiscreteActionSet, PolicyMode};
use crate::scalar::Real;
use crate::seeds::{derive_seed, stream};

use super::adam::Adam;
use super::config::{Schedule, TrainConfig};
use super::curriculum::CurriculumState;
use super::env::{Environment, TrainEnv};
use super::loss::{compute_gradients, LossConfig, LossReport, Trajectory, TrajectoryStep};
use super::nn::{forward, HiddenState, NetworkParams};
use super::observation::Observation;
use super::DrlError;

/// One finished training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub steps: usize,
    pub total_reward: f64,
    pub success: bool,
    pub obstacle_count: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeRecord>,
}

impl TrainLog {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DrlError> {
        let mut out = csv::Writer::from_writer(w);
        for e in &self.episodes {
            out.serialize(e).map_err(|e| DrlError::Config(format!("writing training log: {e}")))?;
        }
        if self.episodes.is_empty() {
            out.write_record(["episode", "steps", "total_reward", "success", "obstacle_count", "wall_time_s"])
                .map_err(|e| DrlError::Config(format!("writing training log: {e}")))?;
        }
        out.flush().map_err(|e| DrlError::Io("training log".into(), e))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DrlError> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| DrlError::Io(path.display().to_string(), e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Success fraction of the last `n` episodes.
    pub fn recent_success(&self, n: usize) -> f64 {
        let tail = &self.episodes[self.episodes.len().saturating_sub(n)..];
        if tail.is_empty() {
            0.0
        } else {
            tail.iter().filter(|e| e.success).count() as f64 / tail.len() as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    StepBudget,
    WallTime,
    SuccessBound,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub params: NetworkParams<T>,
    pub log: TrainLog,
    pub env_steps: u64,
    pub updates: u64,
    pub curriculum_level: usize,
    /// Curriculum window success average at the end.
    pub success_average: f64,
    pub stop: StopReason,
}

/// Builds the environment of worker `id` from its seed.
pub type EnvFactory<'a> = dyn Fn(usize, u64) -> Result<Box<dyn Environment>, DrlError> + Sync + 'a;

struct Finished {
    steps: usize,
    total_reward: f64,
    success: bool,
    obstacle_count: usize,
}

struct Worker<T> {
    env: Box<dyn Environment>,
    rng: ChaCha8Rng,
    hidden: HiddenState<T>,
    obs: Option<Observation>,
    ep_reward: f64,
    ep_steps: usize,
    ep_level: usize,
    input: Vec<T>,
}

struct Rollout<T> {
    traj: Trajectory<T>,
    finished: Option<Finished>,
}

impl<T: Real> Worker<T> {
    fn new(env: Box<dyn Environment>, seed: u64, hidden: usize) -> Self {
        Self {
            env,
            rng: ChaCha8Rng::seed_from_u64(seed),
            hidden: HiddenState::zeros(hidden),
            obs: None,
            ep_reward: 0.0,
            ep_steps: 0,
            ep_level: 0,
            input: Vec::new(),
        }
    }

    /// Collects up to `length` steps, stopping early at an episode end.
    fn rollout(
        &mut self,
        params: &NetworkParams<T>,
        actions: &DiscreteActionSet,
        level: usize,
        length: usize,
    ) -> Result<Rollout<T>, DrlError> {
        if self.obs.is_none() {
            self.obs = Some(self.env.reset(level)?);
            self.hidden = HiddenState::zeros(params.shape().hidden);
            self.ep_reward = 0.0;
            self.ep_steps = 0;
            self.ep_level = level;
        }
        let h0 = self.hidden.clone();
        let mut steps = Vec::with_capacity(length);
        let mut done = false;
        let mut terminal = false;
        let mut success = false;
        for _ in 0..length {
            let obs = self.obs.as_ref().expect("observation present");
            obs.write_input(&mut self.input);
            let d = policy_plan(&self.input, params, &self.hidden, PolicyMode::Sample, &mut self.rng)?;
            let out = self.env.step(actions.get(d.index))?;
            steps.push(TrajectoryStep {
                input: self.input.clone(),
                action: d.index,
                reward: out.reward.total,
                value: d.value.to_f64_lossless(),
            });
            self.hidden = d.hidden;
            self.ep_reward += out.reward.total;
            self.ep_steps += 1;
            self.obs = Some(out.observation);
            if out.done {
                done = true;
                terminal = out.terminal;
                success = out.success;
                break;
            }
        }
        let bootstrap = if terminal {
            0.0
        } else {
            let obs = self.obs.as_ref().expect("observation present");
            obs.write_input(&mut self.input);
            forward(params, &self.input, &self.hidden)?.value.to_f64_lossless()
        };
        let finished = done.then(|| Finished {
            steps: self.ep_steps,
            total_reward: self.ep_reward,
            success,
            obstacle_count: self.ep_level,
        });
        if done {
            self.obs = None;
        }
        Ok(Rollout { traj: Trajectory { h0, steps, terminal, bootstrap }, finished })
    }

    fn rollout_and_gradients(
        &mut self,
        params: &NetworkParams<T>,
        actions: &DiscreteActionSet,
        level: usize,
        length: usize,
        loss: &LossConfig,
        grads: &mut NetworkParams<T>,
    ) -> Result<(usize, LossReport, Option<Finished>), DrlError> {
        let r = self.rollout(params, actions, level, length)?;
        let report = compute_gradients(params, &r.traj, loss, grads)?;
        Ok((r.traj.steps.len(), report, r.finished))
    }
}

/// Shared store: parameters, optimizer, curriculum and log.
struct Store<T> {
    params: Arc<NetworkParams<T>>,
    adam: Adam<T>,
    curriculum: CurriculumState,
    log: TrainLog,
    env_steps: u64,
    updates: u64,
    stop: Option<StopReason>,
    started: Instant,
    last_report: u64,
}

impl<T: Real> Store<T> {
    fn apply(&mut self, grads: &NetworkParams<T>, steps: usize, finished: Option<Finished>, cfg: &TrainConfig) {
        let params = Arc::make_mut(&mut self.params);
        self.adam.step(params.as_mut_slice(), grads.as_slice());
        self.updates += 1;
        self.env_steps += steps as u64;
        if let Some(f) = finished {
            self.log.episodes.push(EpisodeRecord {
                episode: self.log.episodes.len() as u64,
                steps: f.steps,
                total_reward: f.total_reward,
                success: f.success,
                obstacle_count: f.obstacle_count,
                wall_time_s: self.started.elapsed().as_secs_f64(),
            });
            self.curriculum.update(f.success);
        }
        if self.env_steps / 50_000 > self.last_report {
            self.last_report = self.env_steps / 50_000;
            log::info!(
                "steps {} episodes {} level {} success(100) {:.2}",
                self.env_steps,
                self.log.episodes.len(),
                self.curriculum.obstacle_count(),
                self.log.recent_success(100)
            );
        }
        self.check_stop(cfg);
    }

    fn check_stop(&mut self, cfg: &TrainConfig) {
        if self.stop.is_some() {
            return;
        }
        let c = &self.curriculum;
        self.stop = if c.at_max() && c.window_full() && c.moving_average() >= cfg.mean_success_bound {
            Some(StopReason::SuccessBound)
        } else if self.env_steps >= cfg.total_steps {
            Some(StopReason::StepBudget)
        } else if cfg.max_wall_time_s.is_some_and(|t| self.started.elapsed().as_secs_f64() >= t) {
            Some(StopReason::WallTime)
        } else {
            None
        };
    }

    fn into_outcome(self, stop: StopReason) -> TrainOutcome<T> {
        TrainOutcome {
            params: Arc::unwrap_or_clone(self.params),
            log: self.log,
            env_steps: self.env_steps,
            updates: self.updates,
            curriculum_level: self.curriculum.obstacle_count(),
            success_average: self.curriculum.moving_average(),
            stop,
        }
    }
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| e.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Initial parameters for `cfg`.
pub fn initial_params<T: Real>(cfg: &TrainConfig) -> NetworkParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream::INIT, 0));
    NetworkParams::<f64>::init(cfg.shape(), &mut rng).cast()
}

/// Trains on the randomized map curriculum.
pub fn a3c_train<T: Real>(cfg: &TrainConfig) -> Result<TrainOutcome<T>, DrlError> {
    cfg.validate()?;
    let env_params = cfg.env_params();
    let factory = |_: usize, seed: u64| -> Result<Box<dyn Environment>, DrlError> {
        Ok(Box::new(TrainEnv::new(env_params.clone(), cfg.world.clone(), cfg.reward, seed)?))
    };
    a3c_train_with(cfg, initial_params(cfg), &factory)
}

/// Trains from `init` with environments built by `factory`.
pub fn a3c_train_with<T: Real>(
    cfg: &TrainConfig,
    init: NetworkParams<T>,
    factory: &EnvFactory<'_>,
) -> Result<TrainOutcome<T>, DrlError> {
    cfg.validate()?;
    if init.shape() != cfg.shape() {
        return Err(DrlError::Shape(format!("initial parameters {:?} do not match config {:?}", init.shape(), cfg.shape())));
    }
    let shape = init.shape();
    let mut workers = Vec::with_capacity(cfg.n_workers);
    for id in 0..cfg.n_workers {
        let env = factory(id, derive_seed(cfg.seed, stream::WORKER, 2 * id as u64))?;
        workers.push(Worker::<T>::new(env, derive_seed(cfg.seed, stream::WORKER, 2 * id as u64 + 1), shape.hidden));
    }
    let mut store = Store {
        adam: Adam::new(cfg.adam(), shape.param_count()),
        params: Arc::new(init),
        curriculum: CurriculumState::new(cfg.curriculum),
        log: TrainLog::default(),
        env_steps: 0,
        updates: 0,
        stop: None,
        started: Instant::now(),
        last_report: 0,
    };
    store.check_stop(cfg);
    if cfg.total_steps == 0 {
        return Ok(store.into_outcome(StopReason::StepBudget));
    }
    match cfg.schedule {
        Schedule::Lockstep => train_lockstep(cfg, workers, store),
        Schedule::Async => train_async(cfg, workers, store),
    }
}

fn train_lockstep<T: Real>(cfg: &TrainConfig, mut workers: Vec<Worker<T>>, mut store: Store<T>) -> Result<TrainOutcome<T>, DrlError> {
    let shape = store.params.shape();
    let loss = cfg.loss();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.n_workers)
        .build()
        .map_err(|e| DrlError::Config(format!("worker pool: {e}")))?;
    let mut grads: Vec<NetworkParams<T>> = (0..cfg.n_workers).map(|_| NetworkParams::zeros(shape)).collect();
    loop {
        let snapshot = store.params.clone();
        let level = store.curriculum.obstacle_count();
        let results: Vec<_> = pool.install(|| {
            workers
                .par_iter_mut()
                .zip(grads.par_iter_mut())
                .map(|(w, g)| {
                    catch_unwind(AssertUnwindSafe(|| {
                        w.rollout_and_gradients(&snapshot, &cfg.actions, level, cfg.rollout_length, &loss, g)
                    }))
                })
                .collect()
        });
        drop(snapshot);
        for (id, (r, g)) in results.into_iter().zip(&grads).enumerate() {
            let (steps, _report, finished) = match r {
                Ok(Ok(v)) => v,
                Ok(Err(e)) => return Err(crashed(id, e.to_string(), store.log)),
                Err(p) => return Err(crashed(id, panic_message(p), store.log)),
            };
            store.apply(g, steps, finished, cfg);
        }
        if let Some(reason) = store.stop {
            return Ok(store.into_outcome(reason));
        }
    }
}

fn crashed(worker: usize, message: String, log: TrainLog) -> DrlError {
    DrlError::WorkerCrashed { worker, message, log: Box::new(log) }
}

fn train_async<T: Real>(cfg: &TrainConfig, workers: Vec<Worker<T>>, store: Store<T>) -> Result<TrainOutcome<T>, DrlError> {
    let shape = store.params.shape();
    let loss = cfg.loss();
    let shared = Mutex::new(store);
    let failure: Mutex<Option<(usize, String)>> = Mutex::new(None);
    std::thread::scope(|s| {
        for (id, mut w) in workers.into_iter().enumerate() {
            let shared = &shared;
            let failure = &failure;
            let loss = &loss;
            s.spawn(move || {
                let mut g = NetworkParams::zeros(shape);
                loop {
                    let (params, level) = {
                        let st = shared.lock().expect("store lock");
                        if st.stop.is_some() || failure.lock().expect("failure lock").is_some() {
                            return;
                        }
                        (st.params.clone(), st.curriculum.obstacle_count())
                    };
                    let r = catch_unwind(AssertUnwindSafe(|| {
                        w.rollout_and_gradients(&params, &cfg.actions, level, cfg.rollout_length, loss, &mut g)
                    }));
                    drop(params);
                    let (steps, _report, finished) = match r {
                        Ok(Ok(v)) => v,
                        Ok(Err(e)) => {
                            failure.lock().expect("failure lock").get_or_insert((id, e.to_string()));
                            return;
                        }
                        Err(p) => {
                            failure.lock().expect("failure lock").get_or_insert((id, panic_message(p)));
                            return;
                        }
                    };
                    shared.lock().expect("store lock").apply(&g, steps, finished, cfg);
                }
            });
        }
    });
    let store = shared.into_inner().expect("store lock");
    if let Some((worker, message)) = failure.into_inner().expect("failure lock") {
        return Err(crashed(worker, message, store.log));
    }
    let reason = store.stop.unwrap_or(StopReason::StepBudget);
    Ok(store.into_outcome(reason))
}
