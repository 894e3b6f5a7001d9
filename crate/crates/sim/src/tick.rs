use lakeland_core::GameEvent;

use crate::policy::Bot;
use crate::world::WorldState;

/// Advances the world by one tick. In order: the bot's action, crop
/// growth, runoff, bloom updates, food upkeep and achievements. Online
/// bots that did nothing send a heartbeat, and every online tick is padded
/// to `min_events_per_tick` events.
pub fn sim_tick(world: &mut WorldState, bot: &mut Bot) -> Vec<GameEvent> {
    world.begin_tick();
    let tick = world.tick;
    let online = bot.is_online(tick);
    let mut out = Vec::new();

    bot.act(world, &mut out);
    if online && out.is_empty() {
        world.heartbeat(&mut out);
    }
    world.grow();
    world.runoff_step();
    world.update_blooms(&mut out);
    world.upkeep(&mut out);
    world.award_achievements(&mut out);
    if online {
        while out.len() < world.config.min_events_per_tick {
            world.heartbeat(&mut out);
        }
    }

    world.end_tick();
    out
}
