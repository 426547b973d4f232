// Entry point: same-origin client, so the page works wherever the service
// hosts it (skybench serve --ui frontend/dist).

import { ServiceClient } from "./api.js";
import { setupUi } from "./ui.js";

setupUi(new ServiceClient(""));
