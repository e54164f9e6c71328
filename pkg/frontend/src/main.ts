// DOM wiring: render into #app, delegate clicks and keys to the controller,
// poll for fresh results after writes.

import { createApi } from "./api.js";
import { stanceForKey } from "./keyboard.js";
import { renderSession } from "./render.js";
import { SessionController, nextUnlabeled } from "./state.js";
import type { Stance } from "./types.js";

const POLL_MS = 4000;

function start() {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const controller = new SessionController(createApi(""), (session) => {
    root.innerHTML = renderSession(session);
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const button = target.closest("button[data-stance]") as HTMLElement | null;
    if (button) {
      const stance = Number(button.dataset.stance) as Stance;
      const messageId = button.dataset.message!;
      void controller.annotate(messageId, stance);
      return;
    }
    if (target.closest("button[data-action='retry']")) {
      void (controller.session.selected ? controller.refresh() : controller.loadRumours());
      return;
    }
    const row = target.closest("tr[data-rumour]") as HTMLElement | null;
    if (row) {
      void controller.open(row.dataset.rumour!);
    }
  });

  document.addEventListener("keydown", (event) => {
    if (event.metaKey || event.ctrlKey || event.altKey) return;
    const stance = stanceForKey(event.key);
    if (stance === undefined || !controller.session.selected) return;
    const next = nextUnlabeled(controller.session);
    if (next) {
      void controller.annotate(next.id, stance);
    }
  });

  let timer: ReturnType<typeof setTimeout> | null = null;
  const poll = async () => {
    if (controller.session.selected) {
      await controller.refresh();
    } else {
      await controller.loadRumours();
    }
    timer = setTimeout(poll, POLL_MS);
  };
  window.addEventListener("beforeunload", () => {
    if (timer) clearTimeout(timer);
  });

  void controller.loadRumours().then(() => {
    timer = setTimeout(poll, POLL_MS);
  });
}

start();
