import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { apiBase } from "./config.js";

document.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  new App(root, new ApiClient(apiBase())).start();
});
