// Browser entry point: mount the console against the serving daemon.

import { Client } from "./api.js";
import { initConsole } from "./console.js";

const root = document.getElementById("console");
if (root) {
  initConsole(root, new Client(""));
}
