use crate::models::ParamVector;
use crate::numeric::Rng;

const NOISE_STREAM: u64 = 0x4E4F_4953; // "NOIS"

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Server to client (broadcast).
    Down,
    /// Client to server (update collection).
    Up,
}

/// Identifies one parameter transfer so transforms can key their randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transfer {
    pub round: usize,
    pub client: usize,
    pub direction: Direction,
}

/// Encode/decode pair applied to every parameter transfer, standing in for
/// encryption or privacy mechanisms.
pub trait UpdateTransform: Send + Sync {
    fn encode(&self, params: &ParamVector, transfer: Transfer) -> ParamVector;
    fn decode(&self, payload: &ParamVector, transfer: Transfer) -> ParamVector;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTransform;

impl UpdateTransform for IdentityTransform {
    fn encode(&self, params: &ParamVector, _: Transfer) -> ParamVector {
        params.clone()
    }

    fn decode(&self, payload: &ParamVector, _: Transfer) -> ParamVector {
        payload.clone()
    }
}

/// Adds seeded `N(0, sigma^2)` noise on send; decoding is the identity.
#[derive(Debug, Clone, Copy)]
pub struct GaussianNoise {
    pub sigma: f64,
    pub seed: u64,
}

impl UpdateTransform for GaussianNoise {
    fn encode(&self, params: &ParamVector, t: Transfer) -> ParamVector {
        let dir = match t.direction {
            Direction::Down => 0,
            Direction::Up => 1,
        };
        let mut rng = Rng::keyed(&[self.seed, NOISE_STREAM, t.round as u64, t.client as u64, dir]);
        ParamVector::new(params.values().iter().map(|v| v + self.sigma * rng.normal()).collect())
    }

    fn decode(&self, payload: &ParamVector, _: Transfer) -> ParamVector {
        payload.clone()
    }
}
