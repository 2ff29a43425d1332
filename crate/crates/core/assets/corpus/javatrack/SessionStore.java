package track;

import java.io.ByteArrayInputStream;
import java.io.IOException;
import java.io.ObjectInputStream;
import java.util.HashMap;
import java.util.Map;

public class SessionStore {
    private final Map<String, Object> live = new HashMap<>();

    public Object restore(byte[] blob) throws IOException {
        try (ObjectInputStream in = new ObjectInputStream(new ByteArrayInputStream(blob))) {
            Object session = in.readObject();
            live.put(String.valueOf(session.hashCode()), session);
            return session;
        } catch (ClassNotFoundException e) {
            throw new IOException("unknown session class", e);
        }
    }

    public int size() {
        return live.size();
    }

    public void evict(String key) {
        live.remove(key);
    }
}
