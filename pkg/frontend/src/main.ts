import { HatescopeClient } from "./api.js";
import { App } from "./app.js";

// The service base url comes from ?api=… once and sticks in localStorage;
// an empty base means the page is served from the service's own origin.
const params = new URLSearchParams(window.location.search);
const fromQuery = params.get("api");
if (fromQuery !== null) {
  window.localStorage.setItem("hatescope.api", fromQuery);
}
const baseUrl = fromQuery ?? window.localStorage.getItem("hatescope.api") ?? "";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
new App(root, new HatescopeClient(baseUrl)).start();
