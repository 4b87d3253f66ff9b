use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{OperatorKind, Slot};

/// Kinds a parent accepts in one input slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRule {
    pub slot: Slot,
    pub allowed: BTreeSet<OperatorKind>,
}

/// Ordered input slots of one operator kind. Leaves have none.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindRule {
    pub slots: Vec<SlotRule>,
}

impl KindRule {
    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn allowed(&self, slot: Slot) -> Option<&BTreeSet<OperatorKind>> {
        self.slots.iter().find(|s| s.slot == slot).map(|s| &s.allowed)
    }
}

/// Which child kinds may feed which parent slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConnectivityRules {
    pub kinds: BTreeMap<OperatorKind, KindRule>,
}

fn set(kinds: &[OperatorKind]) -> BTreeSet<OperatorKind> {
    kinds.iter().copied().collect()
}

impl Default for ConnectivityRules {
    fn default() -> Self {
        use OperatorKind::*;
        let gets = OperatorKind::GETS;
        let booleans = [IsSame, NotSame, And, Or];
        let mut operand: Vec<_> = gets.to_vec();
        operand.push(Const);
        let mut branch: Vec<_> = vec![IsSame, NotSame, And, Or, Exist, Switch];
        branch.extend(gets);

        let mut kinds = BTreeMap::new();
        kinds.insert(Select, KindRule::default());
        kinds.insert(Const, KindRule::default());
        for get in gets {
            kinds.insert(
                get,
                KindRule {
                    slots: vec![SlotRule {
                        slot: Slot::Arg,
                        allowed: set(&[Select]),
                    }],
                },
            );
        }
        kinds.insert(
            Exist,
            KindRule {
                slots: vec![SlotRule {
                    slot: Slot::Arg,
                    allowed: set(&[Select]),
                }],
            },
        );
        for cmp in [IsSame, NotSame] {
            kinds.insert(
                cmp,
                KindRule {
                    slots: vec![
                        SlotRule {
                            slot: Slot::Lhs,
                            allowed: set(&gets),
                        },
                        SlotRule {
                            slot: Slot::Rhs,
                            allowed: set(&operand),
                        },
                    ],
                },
            );
        }
        for join in [And, Or] {
            kinds.insert(
                join,
                KindRule {
                    slots: vec![
                        SlotRule {
                            slot: Slot::Lhs,
                            allowed: set(&booleans),
                        },
                        SlotRule {
                            slot: Slot::Rhs,
                            allowed: set(&booleans),
                        },
                    ],
                },
            );
        }
        kinds.insert(
            Switch,
            KindRule {
                slots: vec![
                    SlotRule {
                        slot: Slot::Cond,
                        allowed: set(&[IsSame, NotSame, And, Or, Exist, Const]),
                    },
                    SlotRule {
                        slot: Slot::Then,
                        allowed: set(&branch),
                    },
                    SlotRule {
                        slot: Slot::Else,
                        allowed: set(&branch),
                    },
                ],
            },
        );
        ConnectivityRules { kinds }
    }
}

impl ConnectivityRules {
    pub fn rule(&self, kind: OperatorKind) -> Option<&KindRule> {
        self.kinds.get(&kind)
    }

    pub fn allowed(&self, kind: OperatorKind, slot: Slot) -> Option<&BTreeSet<OperatorKind>> {
        self.rule(kind)?.allowed(slot)
    }

    /// Also lets And/Or take Exist operands.
    pub fn allow_exist_operands(mut self) -> Self {
        for join in [OperatorKind::And, OperatorKind::Or] {
            if let Some(rule) = self.kinds.get_mut(&join) {
                for slot in &mut rule.slots {
                    slot.allowed.insert(OperatorKind::Exist);
                }
            }
        }
        self
    }

    /// Drops every kind outside `keep`, both as parent and as child.
    pub fn restricted_to(&self, keep: &BTreeSet<OperatorKind>) -> Self {
        let kinds = self
            .kinds
            .iter()
            .filter(|(k, _)| keep.contains(k))
            .map(|(k, rule)| {
                let slots = rule
                    .slots
                    .iter()
                    .map(|s| SlotRule {
                        slot: s.slot,
                        allowed: s.allowed.intersection(keep).copied().collect(),
                    })
                    .collect();
                (*k, KindRule { slots })
            })
            .collect();
        ConnectivityRules { kinds }
    }

    /// Minimum depth of a complete subtree for every kind that has one.
    pub fn min_depths(&self) -> BTreeMap<OperatorKind, u32> {
        let mut depth: BTreeMap<OperatorKind, u32> = BTreeMap::new();
        loop {
            let mut changed = false;
            for (kind, rule) in &self.kinds {
                let candidate = rule
                    .slots
                    .iter()
                    .map(|s| s.allowed.iter().filter_map(|c| depth.get(c)).min().copied())
                    .try_fold(0u32, |acc, d| d.map(|d| acc.max(d + 1)));
                if let Some(d) = candidate {
                    if depth.get(kind).is_none_or(|old| d < *old) {
                        depth.insert(*kind, d);
                        changed = true;
                    }
                }
            }
            if !changed {
                return depth;
            }
        }
    }
}

/// Minimum depth of any rule-valid complete subtree rooted at `kind`;
/// `None` when no finite completion exists.
pub fn min_subtree_depth(kind: OperatorKind, rules: &ConnectivityRules) -> Option<u32> {
    rules.min_depths().get(&kind).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use OperatorKind::*;

    #[test]
    fn default_min_depths() {
        let rules = ConnectivityRules::default();
        assert_eq!(min_subtree_depth(Select, &rules), Some(0));
        assert_eq!(min_subtree_depth(Const, &rules), Some(0));
        assert_eq!(min_subtree_depth(GetLocation, &rules), Some(1));
        assert_eq!(min_subtree_depth(IsSame, &rules), Some(2));
        assert_eq!(min_subtree_depth(NotSame, &rules), Some(2));
        assert_eq!(min_subtree_depth(And, &rules), Some(3));
        assert_eq!(min_subtree_depth(Or, &rules), Some(3));
        assert_eq!(min_subtree_depth(Exist, &rules), Some(1));
    }

    #[test]
    fn exist_operands_keep_and_deeper_than_comparisons() {
        let rules = ConnectivityRules::default().allow_exist_operands();
        assert_eq!(min_subtree_depth(And, &rules), Some(2));
        assert!(rules.allowed(And, Slot::Lhs).unwrap().contains(&Exist));
    }

    #[test]
    fn restriction_can_make_a_kind_incomplete() {
        let rules = ConnectivityRules::default().restricted_to(&set(&[IsSame, GetCategory]));
        assert_eq!(min_subtree_depth(IsSame, &rules), None);
    }

    #[test]
    fn rules_round_trip_through_json() {
        let rules = ConnectivityRules::default();
        let text = serde_json::to_string(&rules).unwrap();
        let back: ConnectivityRules = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rules);
    }
}
