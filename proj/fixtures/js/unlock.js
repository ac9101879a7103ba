function UnlockExample(x, y, z) {
    function process(temp) {
        return temp;
    }
    function unlock(a, b) {
      var c = process(a);

      function unlocklog(d) {
        console.log(d);
      }
      const decrypted = CryptoJS.AES.decrypt(c, b);
    }
}
