//! Media-player actions and their newline-delimited JSON command encoding.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

/// The closed set of commands the virtual menu can issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PlayerAction {
    PlayPause,
    Stop,
    Next,
    Prev,
    VolUp,
    VolDown,
    Mute,
}

impl PlayerAction {
    pub const ALL: [PlayerAction; 7] = [
        PlayerAction::PlayPause,
        PlayerAction::Stop,
        PlayerAction::Next,
        PlayerAction::Prev,
        PlayerAction::VolUp,
        PlayerAction::VolDown,
        PlayerAction::Mute,
    ];

    /// Name used on the wire and as the default menu region id.
    pub const fn wire_name(self) -> &'static str {
        match self {
            PlayerAction::PlayPause => "play_pause",
            PlayerAction::Stop => "stop",
            PlayerAction::Next => "next",
            PlayerAction::Prev => "prev",
            PlayerAction::VolUp => "vol_up",
            PlayerAction::VolDown => "vol_down",
            PlayerAction::Mute => "mute",
        }
    }

    pub fn from_wire_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.wire_name() == name)
    }
}

impl fmt::Display for PlayerAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// `{"action":"<name>","seq":<n>}` followed by `\n`.
pub fn encode_command(action: PlayerAction, seq: u64) -> Vec<u8> {
    format!("{{\"action\":\"{}\",\"seq\":{}}}\n", action.wire_name(), seq).into_bytes()
}
