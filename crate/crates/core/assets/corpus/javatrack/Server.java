package track;

import java.io.IOException;

public class Server {
    private final UserDao users;
    private final SessionStore sessions;

    public Server(UserDao users, SessionStore sessions) {
        this.users = users;
        this.sessions = sessions;
    }

    public String handleLookup(String name) {
        if (name == null || name.isEmpty()) {
            return "missing name";
        }
        String email = users.findByName(name);
        return email != null ? email : "not found";
    }

    public Object handleResume(byte[] blob) throws IOException {
        if (blob == null || blob.length == 0) {
            throw new IOException("empty session blob");
        }
        return sessions.restore(blob);
    }
}
