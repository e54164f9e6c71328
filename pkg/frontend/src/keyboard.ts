// Keyboard shortcuts for the three stance classes, applied to the earliest
// unlabeled message.

import type { Stance } from "./types.js";

export const STANCE_KEYS: Record<string, Stance> = {
  a: -1,
  n: 0,
  s: 1,
  "1": -1,
  "2": 0,
  "3": 1,
};

export const SHORTCUT_HELP = "a/1 against · n/2 neutral · s/3 supporting · j/k move";

export function stanceForKey(key: string): Stance | undefined {
  return STANCE_KEYS[key.toLowerCase()];
}
