use std::fmt;

use serde::{Deserialize, Serialize};

use super::ControllerError;

/// Stage of one arrow's shooting sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShootState {
    Nocked,
    Aimed,
    GrippedString,
    Drawn,
    Released,
    Fault,
}

impl ShootState {
    pub const ALL: [ShootState; 6] = [
        ShootState::Nocked,
        ShootState::Aimed,
        ShootState::GrippedString,
        ShootState::Drawn,
        ShootState::Released,
        ShootState::Fault,
    ];

    /// The only forward step allowed from `self`.
    pub fn successor(self) -> Option<ShootState> {
        match self {
            ShootState::Nocked => Some(ShootState::Aimed),
            ShootState::Aimed => Some(ShootState::GrippedString),
            ShootState::GrippedString => Some(ShootState::Drawn),
            ShootState::Drawn => Some(ShootState::Released),
            ShootState::Released | ShootState::Fault => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, ShootState::Released | ShootState::Fault)
    }

    /// Fault is reachable from every non-terminal state.
    pub fn can_transition_to(self, to: ShootState) -> bool {
        if self.is_terminal() {
            return false;
        }
        to == ShootState::Fault || self.successor() == Some(to)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShootState::Nocked => "NOCKED",
            ShootState::Aimed => "AIMED",
            ShootState::GrippedString => "GRIPPED_STRING",
            ShootState::Drawn => "DRAWN",
            ShootState::Released => "RELEASED",
            ShootState::Fault => "FAULT",
        }
    }

    pub fn parse(s: &str) -> Option<ShootState> {
        ShootState::ALL.into_iter().find(|st| st.as_str() == s)
    }
}

impl fmt::Display for ShootState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One arrow's sequence. A new machine is created per shot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotStateMachine {
    state: ShootState,
}

impl Default for ShotStateMachine {
    fn default() -> Self {
        Self::new()
    }
}

impl ShotStateMachine {
    pub fn new() -> Self {
        Self {
            state: ShootState::Nocked,
        }
    }

    pub fn state(&self) -> ShootState {
        self.state
    }

    pub fn transition(&mut self, to: ShootState) -> Result<(), ControllerError> {
        if !self.state.can_transition_to(to) {
            return Err(ControllerError::IllegalTransition {
                from: self.state,
                to,
            });
        }
        self.state = to;
        Ok(())
    }

    /// Steps to the successor state.
    pub fn advance(&mut self) -> Result<ShootState, ControllerError> {
        let next = self
            .state
            .successor()
            .ok_or(ControllerError::IllegalTransition {
                from: self.state,
                to: self.state,
            })?;
        self.transition(next)?;
        Ok(next)
    }

    pub fn fault(&mut self) -> Result<(), ControllerError> {
        self.transition(ShootState::Fault)
    }
}
