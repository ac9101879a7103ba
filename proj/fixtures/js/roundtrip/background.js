let session = null;
chrome.runtime.onMessage.addListener(function (msg, sender, reply) {
  switch (msg.type) {
    case "unlock":
      session = {since: Date.now(), pw: msg.pw};
      reply({ok: true});
      break;
    case "lock":
      session = null;
      reply({ok: true});
      break;
    default:
      reply({ok: false, error: "unknown " + msg.type});
  }
  return true;
});
