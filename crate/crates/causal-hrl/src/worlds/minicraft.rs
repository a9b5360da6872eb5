//! A small grid crafting world. The agent walks a square grid, picks wood at
//! the tree, crafts stick and stone pickaxe at the workspace, mines iron ore
//! with the pickaxe, and smelts the diamond at the furnace. Backpack slots
//! are own/not-own; weather random-walks and gold is never obtainable.

use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvVarSchema, VarDef, VarKind, VarVector, World};
use crate::error::Result;
use crate::rng::Rng;
use crate::scm::CausalGraph;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MiniCraftConfig {
    pub grid_size: usize,
    pub episode_length: usize,
    pub seed: u64,
}

impl Default for MiniCraftConfig {
    fn default() -> Self {
        Self {
            grid_size: 7,
            episode_length: 200,
            seed: 0,
        }
    }
}

impl MiniCraftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(crate::Error::Config("grid_size must be at least 2".into()));
        }
        if self.episode_length == 0 {
            return Err(crate::Error::Config("episode_length must be positive".into()));
        }
        Ok(())
    }
}

const WOOD: usize = 1;
const STICK: usize = 2;
const STONE_PICKAXE: usize = 3;
const IRON_ORE: usize = 4;
const DIAMOND: usize = 5;
const WEATHER: usize = 6;
const GOLD: usize = 7;
const N_VARS: usize = 8;

const PICK: usize = 4;
const CRAFT: usize = 5;

pub struct MiniCraft {
    cfg: MiniCraftConfig,
    schema: EnvVarSchema,
    // Fixed per construction seed.
    tree: (usize, usize),
    iron: (usize, usize),
    workspace: (usize, usize),
    furnace: (usize, usize),
    agent: (usize, usize),
    values: VarVector,
    episode_step: usize,
    milestone_bits: u8,
    rng: Rng,
    total_steps: u64,
}

impl MiniCraft {
    pub fn new(cfg: MiniCraftConfig) -> Result<Self> {
        cfg.validate()?;
        let schema = EnvVarSchema::new(vec![
            VarDef { id: 0, name: "action".into(), cardinality: 6, kind: VarKind::Action },
            VarDef { id: WOOD, name: "wood".into(), cardinality: 2, kind: VarKind::Item },
            VarDef { id: STICK, name: "stick".into(), cardinality: 2, kind: VarKind::Item },
            VarDef {
                id: STONE_PICKAXE,
                name: "stone_pickaxe".into(),
                cardinality: 2,
                kind: VarKind::Item,
            },
            VarDef { id: IRON_ORE, name: "iron_ore".into(), cardinality: 2, kind: VarKind::Item },
            VarDef { id: DIAMOND, name: "diamond".into(), cardinality: 2, kind: VarKind::Item },
            VarDef {
                id: WEATHER,
                name: "weather".into(),
                cardinality: 3,
                kind: VarKind::Distractor,
            },
            VarDef { id: GOLD, name: "gold".into(), cardinality: 2, kind: VarKind::Distractor },
        ])?;
        let mut place_rng = Rng::seed_from_u64(cfg.seed);
        let mut cells: Vec<(usize, usize)> = Vec::new();
        while cells.len() < 4 {
            let cell = (
                place_rng.gen_range(0..cfg.grid_size),
                place_rng.gen_range(0..cfg.grid_size),
            );
            if !cells.contains(&cell) {
                cells.push(cell);
            }
        }
        let start = (cfg.grid_size / 2, cfg.grid_size / 2);
        let seed = cfg.seed;
        Ok(Self {
            cfg,
            schema,
            tree: cells[0],
            iron: cells[1],
            workspace: cells[2],
            furnace: cells[3],
            agent: start,
            values: vec![0; N_VARS],
            episode_step: 0,
            milestone_bits: 0,
            rng: Rng::seed_from_u64(seed ^ 0x5eed),
            total_steps: 0,
        })
    }

    pub fn stations(&self) -> [(usize, usize); 4] {
        [self.tree, self.iron, self.workspace, self.furnace]
    }

    fn refresh_milestones(&mut self) {
        for (bit, var) in [WOOD, STICK, STONE_PICKAXE, IRON_ORE, DIAMOND].iter().enumerate() {
            if self.values[*var] >= 1 {
                self.milestone_bits |= 1 << bit;
            }
        }
    }
}

impl World for MiniCraft {
    fn schema(&self) -> &EnvVarSchema {
        &self.schema
    }

    fn reset(&mut self, seed: u64) -> VarVector {
        self.values.iter_mut().for_each(|v| *v = 0);
        self.agent = (self.cfg.grid_size / 2, self.cfg.grid_size / 2);
        self.episode_step = 0;
        self.milestone_bits = 0;
        self.rng = Rng::seed_from_u64(seed ^ 0x5eed);
        self.values.clone()
    }

    fn step(&mut self, action: usize) -> (VarVector, bool) {
        assert!(action < 6, "action {action} out of range");
        let g = self.cfg.grid_size;
        match action {
            0 => self.agent.0 = self.agent.0.saturating_sub(1),
            1 => self.agent.0 = (self.agent.0 + 1).min(g - 1),
            2 => self.agent.1 = self.agent.1.saturating_sub(1),
            3 => self.agent.1 = (self.agent.1 + 1).min(g - 1),
            PICK => {
                if self.agent == self.tree {
                    self.values[WOOD] = 1;
                } else if self.agent == self.iron && self.values[STONE_PICKAXE] >= 1 {
                    self.values[IRON_ORE] = 1;
                }
            }
            CRAFT => {
                if self.agent == self.workspace {
                    if self.values[WOOD] >= 1 && self.values[STICK] == 0 {
                        self.values[STICK] = 1;
                    } else if self.values[STICK] >= 1 && self.values[STONE_PICKAXE] == 0 {
                        self.values[STONE_PICKAXE] = 1;
                    }
                } else if self.agent == self.furnace && self.values[IRON_ORE] >= 1 {
                    self.values[DIAMOND] = 1;
                }
            }
            _ => unreachable!(),
        }
        // Weather walks one step up, down, or stays, regardless of action.
        let delta: i64 = self.rng.gen_range(-1..=1);
        self.values[WEATHER] = (self.values[WEATHER] as i64 + delta).clamp(0, 2) as usize;
        self.values[0] = action;
        self.episode_step += 1;
        self.total_steps += 1;
        self.refresh_milestones();
        (self.values.clone(), self.episode_step >= self.cfg.episode_length)
    }

    fn ground_truth_graph(&self) -> CausalGraph {
        CausalGraph::from_edges(
            N_VARS,
            &[
                (WOOD, 0),
                (STICK, 0),
                (STICK, WOOD),
                (STONE_PICKAXE, 0),
                (STONE_PICKAXE, STICK),
                (IRON_ORE, 0),
                (IRON_ORE, STONE_PICKAXE),
                (DIAMOND, 0),
                (DIAMOND, IRON_ORE),
            ],
        )
    }

    fn milestones(&self) -> u8 {
        self.milestone_bits
    }

    fn milestone_count(&self) -> usize {
        5
    }

    fn primitive_action_count(&self) -> usize {
        6
    }

    fn task_achieved(&self) -> bool {
        self.values[DIAMOND] >= 1
    }

    fn steps_taken(&self) -> u64 {
        self.total_steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world() -> MiniCraft {
        MiniCraft::new(MiniCraftConfig::default()).unwrap()
    }

    fn go_to(w: &mut MiniCraft, target: (usize, usize)) {
        while w.agent != target {
            let a = if w.agent.0 > target.0 {
                0
            } else if w.agent.0 < target.0 {
                1
            } else if w.agent.1 > target.1 {
                2
            } else {
                3
            };
            w.step(a);
        }
    }

    #[test]
    fn full_chain_is_craftable() {
        let mut w = world();
        w.reset(1);
        let [tree, iron, workspace, furnace] = w.stations();
        go_to(&mut w, tree);
        w.step(PICK);
        assert_eq!(w.values[WOOD], 1);
        go_to(&mut w, workspace);
        w.step(CRAFT);
        assert_eq!(w.values[STICK], 1);
        w.step(CRAFT);
        assert_eq!(w.values[STONE_PICKAXE], 1);
        go_to(&mut w, iron);
        w.step(PICK);
        assert_eq!(w.values[IRON_ORE], 1);
        go_to(&mut w, furnace);
        w.step(CRAFT);
        assert_eq!(w.values[DIAMOND], 1);
        assert_eq!(w.milestones(), 0b11111);
        assert!(w.task_achieved());
        assert_eq!(w.values[GOLD], 0);
    }

    #[test]
    fn recipes_require_their_inputs() {
        let mut w = world();
        w.reset(2);
        let [_, iron, workspace, furnace] = w.stations();
        go_to(&mut w, workspace);
        w.step(CRAFT);
        assert_eq!(w.values[STICK], 0, "stick needs wood");
        go_to(&mut w, iron);
        w.step(PICK);
        assert_eq!(w.values[IRON_ORE], 0, "iron needs the pickaxe");
        go_to(&mut w, furnace);
        w.step(CRAFT);
        assert_eq!(w.values[DIAMOND], 0, "diamond needs iron ore");
    }

    #[test]
    fn stations_are_fixed_per_seed_and_inside_the_grid() {
        let a = MiniCraft::new(MiniCraftConfig { seed: 9, ..Default::default() }).unwrap();
        let b = MiniCraft::new(MiniCraftConfig { seed: 9, ..Default::default() }).unwrap();
        assert_eq!(a.stations(), b.stations());
        for (r, c) in a.stations() {
            assert!(r < a.cfg.grid_size && c < a.cfg.grid_size);
        }
        let mut distinct = a.stations().to_vec();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn ground_truth_matches_recipes() {
        let w = world();
        let g = w.ground_truth_graph();
        assert_eq!(g.edge_count(), 9);
        assert!(g.has_edge(STICK, WOOD));
        assert!(g.has_edge(DIAMOND, IRON_ORE));
        assert!(g.is_isolated(GOLD));
        assert!(g.is_isolated(WEATHER));
        assert!(g.is_acyclic());
    }

    #[test]
    fn weather_changes_while_gold_never_does() {
        let mut w = world();
        w.reset(3);
        let mut saw_weather_change = false;
        let mut prev = w.values[WEATHER];
        for i in 0..200 {
            let (x, done) = w.step(i % 6);
            saw_weather_change |= x[WEATHER] != prev;
            prev = x[WEATHER];
            assert_eq!(x[GOLD], 0);
            if done {
                w.reset(4 + i as u64);
            }
        }
        assert!(saw_weather_change);
    }
}
