use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TrialError;

/// What a frame shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "role", content = "ordinal")]
pub enum FrameRole {
    Object(u32),
    Delay,
}

/// Assignment of task objects and delays to frames.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSchedule {
    pub roles: Vec<FrameRole>,
}

impl FrameSchedule {
    pub fn n_frames(&self) -> usize {
        self.roles.len()
    }

    pub fn frame_of(&self, ordinal: u32) -> Option<usize> {
        self.roles.iter().position(|r| *r == FrameRole::Object(ordinal))
    }

    pub fn object_count(&self) -> usize {
        self.roles.iter().filter(|r| matches!(r, FrameRole::Object(_))).count()
    }

    pub fn delay_count(&self) -> usize {
        self.n_frames() - self.object_count()
    }

    /// Frame of the highest-numbered object among `ordinals`.
    pub fn last_frame(&self, ordinals: impl IntoIterator<Item = u32>) -> Option<usize> {
        ordinals.into_iter().filter_map(|o| self.frame_of(o)).max()
    }
}

/// Places objects 1..=n_objects in order across `n_frames`. The first frame
/// always shows object 1; the others go to uniformly chosen later frames.
pub fn layout_frames<R: Rng + ?Sized>(
    n_objects: usize,
    n_frames: usize,
    rng: &mut R,
) -> Result<FrameSchedule, TrialError> {
    if n_objects == 0 {
        return Err(TrialError::NoObjects);
    }
    if n_objects > n_frames {
        return Err(TrialError::TooManyObjects {
            objects: n_objects,
            n_frames,
        });
    }
    let mut frames: Vec<usize> = sample(rng, n_frames - 1, n_objects - 1)
        .into_iter()
        .map(|f| f + 1)
        .collect();
    frames.sort_unstable();
    let mut roles = vec![FrameRole::Delay; n_frames];
    roles[0] = FrameRole::Object(1);
    for (i, f) in frames.into_iter().enumerate() {
        roles[f] = FrameRole::Object(i as u32 + 2);
    }
    Ok(FrameSchedule { roles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seven_objects_in_nine_frames_leave_two_delays() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = layout_frames(7, 9, &mut rng).unwrap();
        assert_eq!(s.delay_count(), 2);
        let ordinals: Vec<u32> = s
            .roles
            .iter()
            .filter_map(|r| match r {
                FrameRole::Object(o) => Some(*o),
                FrameRole::Delay => None,
            })
            .collect();
        assert_eq!(ordinals, (1..=7).collect::<Vec<_>>());
    }

    #[test]
    fn full_schedule_has_no_delays() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(layout_frames(5, 5, &mut rng).unwrap().delay_count(), 0);
    }

    #[test]
    fn too_many_objects_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            layout_frames(4, 3, &mut rng),
            Err(TrialError::TooManyObjects { .. })
        ));
    }
}
