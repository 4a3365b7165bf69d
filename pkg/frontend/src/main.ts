// Browser bootstrap: create a session, open the stream, mount the view.

import { PlatformClient } from "./api.js";
import { ConsoleCore } from "./core.js";
import { StreamClient } from "./stream.js";
import { ConsoleView } from "./view.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");

  const client = new PlatformClient(window.location.origin);
  const core = new ConsoleCore(client);
  const view = new ConsoleView(root, core);
  view.mount();

  try {
    const sessionId = await core.openSession();
    const stream = new StreamClient(
      client.streamUrl(sessionId),
      {
        onFrame: (frame) => core.handleFrame(frame),
        onState: (state) => core.setConnection(state),
      },
      (url) => new WebSocket(url) as never,
    );
    stream.start();
  } catch (err) {
    core.setConnection("closed");
    const banner = root.querySelector(".banner");
    if (banner) banner.textContent = `Could not open a session: ${String(err)}`;
  }
}

void boot();
