/**
 * Browser bootstrap: one session per ?session= id, restored from
 * localStorage so a reload brings the history back.
 */

import { mountApp } from "./app.js";
import { WorkbenchClient } from "./client.js";
import { Session } from "./session.js";

const params = new URLSearchParams(location.search);
const sessionId = params.get("session") ?? "default";
const serviceUrl = params.get("service") ?? "http://127.0.0.1:8000";

const root = document.getElementById("workbench");
if (!root) throw new Error("missing #workbench mount point");

const app = mountApp(root, {
  client: new WorkbenchClient(serviceUrl),
  session: Session.restore(sessionId),
});
app.lastOp = app.checkService();
