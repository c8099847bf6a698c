//! State changes that follow every action.
//!
//! * Heat: anything directly on or in a switched-on heat source becomes Hot;
//!   anything inside a Hot object sitting on a switched-on heat source
//!   becomes Hot as well. Cookable objects that turn Hot this way are cooked.
//! * Cold: objects in a closed cold source become Cold.
//! * Water: fillable objects in a running water source fill with water.
//!
//! Temperature is the only value that can go back; cooking and filling by
//! the tick are one-way.

use super::object::{Relation, Temperature};
use super::World;

impl World {
    pub fn dynamics_tick(&mut self) {
        let heaters: Vec<String> = self
            .objects
            .values()
            .filter(|o| o.state.is_heat_source && o.state.is_toggled)
            .map(|o| o.id.clone())
            .collect();
        for h in &heaters {
            for child in self.children(h) {
                self.heat(&child);
                for grandchild in self.children(&child) {
                    if self.objects[&child].state.temperature == Temperature::Hot {
                        self.heat(&grandchild);
                    }
                }
            }
        }

        let coolers: Vec<String> = self
            .objects
            .values()
            .filter(|o| o.state.is_cold_source && !(o.state.openable && o.state.is_open))
            .map(|o| o.id.clone())
            .collect();
        for c in &coolers {
            for child in self.children(c) {
                let o = self.objects.get_mut(&child).expect("child exists");
                if o.parent.as_ref().is_some_and(|(_, r)| *r == Relation::In) {
                    o.state.temperature = Temperature::Cold;
                }
            }
        }

        let taps: Vec<String> = self
            .objects
            .values()
            .filter(|o| o.water_source && o.state.is_toggled)
            .map(|o| o.id.clone())
            .collect();
        for t in &taps {
            for child in self.children(t) {
                let s = &mut self.objects.get_mut(&child).expect("child exists").state;
                if s.can_fill_with_liquid {
                    s.is_filled_with_liquid = true;
                    s.fill_liquid = "water".into();
                }
            }
        }
    }

    fn heat(&mut self, id: &str) {
        let s = &mut self.objects.get_mut(id).expect("object exists").state;
        s.temperature = Temperature::Hot;
        if s.cookable {
            s.is_cooked = true;
        }
    }
}
