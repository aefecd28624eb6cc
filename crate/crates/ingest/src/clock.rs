use std::sync::Mutex;
use std::time::{Duration, SystemTime};

/// Wall-clock access, replaceable so retry delays and token expiry can be tested.
pub trait Clock: Send + Sync {
    fn now(&self) -> SystemTime;
    fn sleep(&self, duration: Duration);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> SystemTime {
        SystemTime::now()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// A clock that only moves when slept on or advanced, and remembers every sleep.
#[derive(Debug)]
pub struct VirtualClock {
    state: Mutex<(SystemTime, Vec<Duration>)>,
}

impl VirtualClock {
    pub fn starting_at(start: SystemTime) -> Self {
        VirtualClock {
            state: Mutex::new((start, Vec::new())),
        }
    }

    pub fn advance(&self, by: Duration) {
        self.state.lock().expect("clock lock").0 += by;
    }

    pub fn sleeps(&self) -> Vec<Duration> {
        self.state.lock().expect("clock lock").1.clone()
    }

    pub fn total_slept(&self) -> Duration {
        self.sleeps().iter().sum()
    }
}

impl Default for VirtualClock {
    fn default() -> Self {
        VirtualClock::starting_at(SystemTime::UNIX_EPOCH + Duration::from_secs(1_700_000_000))
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> SystemTime {
        self.state.lock().expect("clock lock").0
    }

    fn sleep(&self, duration: Duration) {
        let mut s = self.state.lock().expect("clock lock");
        s.0 += duration;
        s.1.push(duration);
    }
}
